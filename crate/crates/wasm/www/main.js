import init, { copositivity_landscape, build_dual_demo, dam_demo } from "./pkg/copodual_wasm.js";

const $ = (id) => document.getElementById(id);

function show(id, f) {
  const out = $(id);
  try {
    const v = f();
    out.className = "";
    out.textContent = JSON.stringify(v, null, 2);
    return v;
  } catch (e) {
    out.className = "error";
    out.textContent = String(e);
    return null;
  }
}

function color(value, scale) {
  if (value < 0) {
    const s = Math.min(1, -value / scale);
    return `rgb(${200 + 55 * s}, ${60 - 60 * s}, ${60 - 60 * s})`;
  }
  const s = Math.min(1, value / scale);
  return `rgb(${60}, ${90 + 100 * s}, ${200 - 80 * s})`;
}

// p = 2 as a curve over t₁, p = 3 as a ternary scatter
function draw(v) {
  const cv = $("landscape-canvas");
  const ctx = cv.getContext("2d");
  ctx.clearRect(0, 0, cv.width, cv.height);
  const values = v.samples.map((s) => s.value);
  const scale = Math.max(...values.map(Math.abs), 1e-12);
  const pad = 30;
  const w = cv.width - 2 * pad;
  const h = cv.height - 2 * pad;
  if (v.p === 2) {
    const lo = Math.min(0, ...values);
    const hi = Math.max(0, ...values);
    const y = (val) => pad + h - ((val - lo) / (hi - lo || 1)) * h;
    ctx.strokeStyle = "#999";
    ctx.beginPath();
    ctx.moveTo(pad, y(0));
    ctx.lineTo(pad + w, y(0));
    ctx.stroke();
    const pts = v.samples.map((s) => [pad + s.t[0] * w, y(s.value), s.value]).sort((a, b) => a[0] - b[0]);
    ctx.strokeStyle = "#245";
    ctx.beginPath();
    pts.forEach(([x, yy], i) => (i ? ctx.lineTo(x, yy) : ctx.moveTo(x, yy)));
    ctx.stroke();
    pts.forEach(([x, yy, val]) => {
      ctx.fillStyle = color(val, scale);
      ctx.fillRect(x - 2, yy - 2, 4, 4);
    });
  } else if (v.p === 3) {
    const corner = [[pad + w / 2, pad], [pad, pad + h], [pad + w, pad + h]];
    for (const s of v.samples) {
      const x = s.t.reduce((a, t, k) => a + t * corner[k][0], 0);
      const y = s.t.reduce((a, t, k) => a + t * corner[k][1], 0);
      ctx.fillStyle = color(s.value, scale);
      ctx.beginPath();
      ctx.arc(x, y, 4, 0, 2 * Math.PI);
      ctx.fill();
    }
    ctx.fillStyle = "#000";
    ["e1", "e2", "e3"].forEach((label, k) => ctx.fillText(label, corner[k][0] - 6, corner[k][1] + (k ? 16 : -8)));
  } else {
    ctx.fillText("drawing is available for p = 2 and p = 3", pad, pad);
  }
}

await init();

$("landscape-run").onclick = () => {
  const v = show("landscape-out", () => {
    const r = JSON.parse(copositivity_landscape($("matrix").value, Number($("landscape-k").value)));
    draw(r);
    return r.verdict;
  });
  if (!v) $("landscape-canvas").getContext("2d").clearRect(0, 0, 480, 420);
};

$("dual-run").onclick = () =>
  show("dual-out", () => JSON.parse(build_dual_demo($("program").value, Number($("dual-k").value))));

$("dam-run").onclick = () =>
  show("dam-out", () => {
    const r = JSON.parse(dam_demo($("dataset").value));
    return { steps: r.steps, functional: r.functional, output: r.output };
  });

$("landscape-run").onclick();
