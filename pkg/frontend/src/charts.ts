/** Minimal dependency-free SVG line charts: best-so-far utility vs iteration,
 * and vs cumulative cost. */

export interface Point {
  x: number;
  y: number;
}

const W = 420;
const H = 220;
const PAD = 36;

function scale(points: Point[]): (p: Point) => [number, number] {
  const xs = points.map((p) => p.x);
  const ys = points.map((p) => p.y);
  const x0 = Math.min(...xs);
  const x1 = Math.max(...xs);
  const y0 = Math.min(...ys);
  const y1 = Math.max(...ys);
  const sx = (x: number) => PAD + ((x - x0) / Math.max(x1 - x0, 1e-12)) * (W - 2 * PAD);
  const sy = (y: number) => H - PAD - ((y - y0) / Math.max(y1 - y0, 1e-12)) * (H - 2 * PAD);
  return (p) => [sx(p.x), sy(p.y)];
}

export function lineChartSvg(points: Point[], xLabel: string, yLabel: string): string {
  if (points.length === 0) {
    return `<svg viewBox="0 0 ${W} ${H}" class="chart"><text x="${W / 2}" y="${H / 2}" text-anchor="middle" class="chart-empty">no data yet</text></svg>`;
  }
  const toPx = scale(points);
  const path = points
    .map((p, i) => `${i === 0 ? "M" : "L"}${toPx(p)[0].toFixed(1)},${toPx(p)[1].toFixed(1)}`)
    .join(" ");
  const dots = points
    .map((p) => {
      const [cx, cy] = toPx(p);
      return `<circle cx="${cx.toFixed(1)}" cy="${cy.toFixed(1)}" r="2.5"/>`;
    })
    .join("");
  return [
    `<svg viewBox="0 0 ${W} ${H}" class="chart">`,
    `<line x1="${PAD}" y1="${H - PAD}" x2="${W - PAD}" y2="${H - PAD}" class="axis"/>`,
    `<line x1="${PAD}" y1="${PAD}" x2="${PAD}" y2="${H - PAD}" class="axis"/>`,
    `<text x="${W / 2}" y="${H - 8}" text-anchor="middle" class="axis-label">${xLabel}</text>`,
    `<text x="12" y="${H / 2}" text-anchor="middle" transform="rotate(-90 12 ${H / 2})" class="axis-label">${yLabel}</text>`,
    `<path d="${path}" class="series"/>`,
    dots,
    "</svg>",
  ].join("");
}
