import { ApiClient } from "./api.js";
import { Controller } from "./controller.js";
import { renderAll } from "./dom.js";
import { Store } from "./state.js";

const baseUrl = (window as { OCTSCREEN_API?: string }).OCTSCREEN_API ?? "";
const store = new Store(20);
const api = new ApiClient(baseUrl);
const controller = new Controller(api, store);

store.subscribe(() => renderAll(store.snapshot()));

const slider = document.getElementById("delta-slider") as HTMLInputElement;
slider.addEventListener("input", () => controller.onDeltaChange(Number(slider.value)));

document.getElementById("roster-body")!.addEventListener("click", (event) => {
  const row = (event.target as HTMLElement).closest<HTMLTableRowElement>("tr[data-volume]");
  if (row?.dataset.volume) void controller.onSelectVolume(row.dataset.volume);
});

document.getElementById("prev-page")!.addEventListener("click", () => {
  controller.onPageChange(store.snapshot().page - 1);
});
document.getElementById("next-page")!.addEventListener("click", () => {
  controller.onPageChange(store.snapshot().page + 1);
});

void controller.start();
