/** Display rounding: the UI shows exactly two decimals and computes nothing
 * else itself, so it can never disagree with the service. */
export function round2(value: number): string {
  return value.toFixed(2);
}

export function formatDelta(value: number): string {
  return (value >= 0 ? "+" : "") + value.toFixed(2);
}
