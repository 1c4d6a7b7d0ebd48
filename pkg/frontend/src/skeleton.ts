// Pose rendering: joints become dots, skeleton edges become lines, and
// anything touching an unlabeled joint is silently left out. The edge
// list always comes from the service's category descriptor so the
// drawing follows whatever annotation variant the index was built with.

export interface Joint {
  x: number;
  y: number;
  labeled: boolean;
}

export interface RenderOptions {
  size?: number; // square viewport edge, px
  margin?: number; // padding inside the viewport, px
  stroke?: string;
  fill?: string;
}

const DEFAULTS: Required<RenderOptions> = {
  size: 160,
  margin: 12,
  stroke: "#2b8a9d",
  fill: "#e8734a",
};

/** Split 51 flat numbers (x, y, visibility per joint) into joints. */
export function jointsFromFlat(keypoints: number[]): Joint[] {
  const joints: Joint[] = [];
  for (let i = 0; i + 2 < keypoints.length; i += 3) {
    const x = keypoints[i] as number;
    const y = keypoints[i + 1] as number;
    const vis = keypoints[i + 2] as number;
    joints.push({ x, y, labeled: vis > 0 });
  }
  return joints;
}

// Fixed-precision coordinates keep the output identical across runs.
function fmt(value: number): string {
  return value.toFixed(2);
}

/** Draw a pose as an SVG string.
 *
 * Labeled joints are fitted into the viewport preserving aspect ratio.
 * Edges are 1-based index pairs; an edge is drawn only when both of its
 * endpoints are labeled. A pose with no labeled joints yields an empty
 * drawing.
 */
export function renderPose(
  keypoints: number[],
  edges: [number, number][],
  options: RenderOptions = {},
): string {
  const opt = { ...DEFAULTS, ...options };
  const joints = jointsFromFlat(keypoints);
  const labeled = joints.filter((j) => j.labeled);

  const open = `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${opt.size} ${opt.size}" ` +
    `width="${opt.size}" height="${opt.size}">`;
  if (labeled.length === 0) return `${open}</svg>`;

  // Fit the labeled extent into the padded viewport; a single labeled
  // joint (zero extent) lands in the center.
  const xs = labeled.map((j) => j.x);
  const ys = labeled.map((j) => j.y);
  const minX = Math.min(...xs);
  const minY = Math.min(...ys);
  const extent = Math.max(Math.max(...xs) - minX, Math.max(...ys) - minY);
  const inner = opt.size - 2 * opt.margin;
  const scale = extent > 0 ? inner / extent : 1;
  const offX = opt.margin + (inner - (Math.max(...xs) - minX) * scale) / 2;
  const offY = opt.margin + (inner - (Math.max(...ys) - minY) * scale) / 2;
  const place = (j: Joint) => ({
    x: offX + (j.x - minX) * scale,
    y: offY + (j.y - minY) * scale,
  });

  const parts: string[] = [open];
  for (const [a, b] of edges) {
    const from = joints[a - 1];
    const to = joints[b - 1];
    if (!from?.labeled || !to?.labeled) continue;
    const p = place(from);
    const q = place(to);
    parts.push(
      `<line x1="${fmt(p.x)}" y1="${fmt(p.y)}" x2="${fmt(q.x)}" y2="${fmt(q.y)}" ` +
        `stroke="${opt.stroke}" stroke-width="2"/>`,
    );
  }
  for (const joint of joints) {
    if (!joint.labeled) continue;
    const p = place(joint);
    parts.push(`<circle cx="${fmt(p.x)}" cy="${fmt(p.y)}" r="3" fill="${opt.fill}"/>`);
  }
  parts.push("</svg>");
  return parts.join("");
}
