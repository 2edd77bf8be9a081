import { formatDelta, round2 } from "./format.js";
import { RosterEntry, StoreSnapshot, isFlipped } from "./state.js";
import { ScreeningReport } from "./types.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function probColor(p: number): string {
  // blue (negative) to red (positive) through neutral
  const r = Math.round(255 * p);
  const b = Math.round(255 * (1 - p));
  return `rgb(${r}, 80, ${b})`;
}

function gauge(label: string, value: number | null): string {
  const text = value === null ? "-" : round2(value);
  const width = value === null ? 0 : Math.round(value * 100);
  return `
    <div class="gauge">
      <span class="gauge-label">${label}</span>
      <div class="gauge-track"><div class="gauge-fill" style="width:${width}%"></div></div>
      <span class="gauge-value">${text}</span>
    </div>`;
}

export function renderError(snapshot: StoreSnapshot): void {
  const banner = el<HTMLDivElement>("error-banner");
  banner.textContent = snapshot.error ?? "";
  banner.style.display = snapshot.error ? "block" : "none";
}

export function renderSlider(snapshot: StoreSnapshot): void {
  el<HTMLSpanElement>("delta-value").textContent = formatDelta(snapshot.delta);
  const input = el<HTMLInputElement>("delta-slider");
  if (Number(input.value) !== snapshot.delta) input.value = String(snapshot.delta);
}

function rosterRow(entry: RosterEntry, selected: boolean): string {
  const flipped = isFlipped(entry);
  const decision = entry.decision === null ? "…" : entry.decision === 1 ? "high" : "low";
  const cls = [
    "roster-row",
    flipped ? "flipped" : "",
    selected ? "selected" : "",
    entry.decision === 1 ? "positive" : "",
  ]
    .filter(Boolean)
    .join(" ");
  const scores =
    entry.uPosterior === null
      ? ""
      : `u=${round2(entry.uPosterior!)}/${round2(entry.uDisagreement!)}/${round2(entry.uSweep!)}`;
  return `
    <tr class="${cls}" data-volume="${entry.volumeId}">
      <td>${entry.volumeId}</td>
      <td>${entry.split}</td>
      <td class="decision">${decision}${flipped ? " &#8646;" : ""}</td>
      <td class="scores">${scores}</td>
    </tr>`;
}

export function renderRoster(snapshot: StoreSnapshot): void {
  const body = el<HTMLTableSectionElement>("roster-body");
  body.innerHTML = snapshot.roster
    .map((entry) => rosterRow(entry, entry.volumeId === snapshot.selectedVolume))
    .join("");
  el<HTMLSpanElement>("page-label").textContent = `page ${snapshot.page + 1}`;
  const flips = snapshot.roster.filter(isFlipped).length;
  el<HTMLSpanElement>("flip-count").textContent =
    flips === 0 ? "no flips vs benchmark" : `${flips} flipped vs benchmark`;
}

function sweepSvg(points: [number, number][]): string {
  const w = 260;
  const h = 80;
  const pad = 8;
  const x = (d: number) => pad + ((d + 1) / 2) * (w - 2 * pad);
  const y = (p: number) => h - pad - p * (h - 2 * pad);
  const path = points.map(([d, p], i) => `${i ? "L" : "M"}${x(d).toFixed(1)},${y(p).toFixed(1)}`).join(" ");
  const dots = points
    .map(([d, p]) => `<circle cx="${x(d).toFixed(1)}" cy="${y(p).toFixed(1)}" r="2.5"/>`)
    .join("");
  return `
    <svg viewBox="0 0 ${w} ${h}" class="sweep-curve">
      <line x1="${x(-1)}" y1="${y(0.5)}" x2="${x(1)}" y2="${y(0.5)}" class="half-line"/>
      <path d="${path}" fill="none"/>
      ${dots}
    </svg>`;
}

export function renderDetail(snapshot: StoreSnapshot): void {
  const panel = el<HTMLDivElement>("detail-panel");
  const report: ScreeningReport | null = snapshot.selectedReport;
  if (!snapshot.selectedVolume) {
    panel.innerHTML = "<p class='hint'>select a volume</p>";
    return;
  }
  if (!report) {
    panel.innerHTML = `<p class='hint'>loading ${snapshot.selectedVolume}…</p>`;
    return;
  }
  const strip = report.frame_posteriors
    .map(
      (p) =>
        `<div class="frame-cell" style="background:${probColor(p)}" title="${round2(p)}">${round2(p)}</div>`,
    )
    .join("");
  panel.innerHTML = `
    <h3>${report.volume_id} at &delta; = ${formatDelta(report.delta)}:
        <span class="decision">${report.decision === 1 ? "high myopia" : "low myopia"}</span></h3>
    <div class="frame-strip">${strip}</div>
    ${gauge("posterior", report.u_posterior)}
    ${gauge("disagreement", report.u_disagreement)}
    ${gauge("sweep", report.u_sweep)}
    ${sweepSvg(report.sweep)}
  `;
}

export function renderAll(snapshot: StoreSnapshot): void {
  renderError(snapshot);
  renderSlider(snapshot);
  renderRoster(snapshot);
  renderDetail(snapshot);
}
