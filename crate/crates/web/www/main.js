import init, { fig1_scatter, sample_histograms, search_curves } from "./pkg/gbs_dks_web.js";

const GBS = "#d62728";
const UNIFORM = "#7f7f7f";
const PAD = { left: 60, right: 20, top: 20, bottom: 40 };

const num = (id) => Number(document.getElementById(id).value);
const big = (id) => BigInt(Math.trunc(num(id)));

function frame(canvas, xmax, ymin, ymax, logY, xlabel, ylabel) {
  const ctx = canvas.getContext("2d");
  const w = canvas.width - PAD.left - PAD.right;
  const h = canvas.height - PAD.top - PAD.bottom;
  const fy = (v) => (logY ? (Math.log10(v) - ymin) / (ymax - ymin) : (v - ymin) / (ymax - ymin));
  const px = (x) => PAD.left + (x / xmax) * w;
  const py = (y) => PAD.top + (1 - fy(y)) * h;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.strokeStyle = "#000";
  ctx.strokeRect(PAD.left, PAD.top, w, h);
  ctx.fillStyle = "#000";
  ctx.font = "12px sans-serif";
  ctx.textAlign = "center";
  for (let i = 0; i <= 5; i++) {
    const x = (xmax * i) / 5;
    ctx.fillText(Number.isInteger(x) ? x : x.toFixed(1), px(x), PAD.top + h + 16);
  }
  ctx.fillText(xlabel, PAD.left + w / 2, canvas.height - 6);
  ctx.textAlign = "right";
  for (let i = 0; i <= 4; i++) {
    const t = ymin + ((ymax - ymin) * i) / 4;
    const label = logY ? "1e" + t.toFixed(1) : t.toFixed(1);
    ctx.fillText(label, PAD.left - 6, PAD.top + (1 - i / 4) * h + 4);
  }
  ctx.save();
  ctx.translate(14, PAD.top + h / 2);
  ctx.rotate(-Math.PI / 2);
  ctx.textAlign = "center";
  ctx.fillText(ylabel, 0, 0);
  ctx.restore();
  return { ctx, px, py };
}

function polyline(ctx, pts, colour, dashed) {
  ctx.strokeStyle = colour;
  ctx.setLineDash(dashed ? [6, 4] : []);
  ctx.beginPath();
  pts.forEach(([x, y], i) => (i ? ctx.lineTo(x, y) : ctx.moveTo(x, y)));
  ctx.stroke();
  ctx.setLineDash([]);
}

function guarded(noteId, f) {
  const note = document.getElementById(noteId);
  note.className = "note";
  note.textContent = "working...";
  setTimeout(() => {
    try {
      const t0 = performance.now();
      const text = f();
      note.textContent = `${text} (${((performance.now() - t0) / 1000).toFixed(2)} s)`;
    } catch (e) {
      note.className = "note error";
      note.textContent = String(e);
    }
  }, 10);
}

function drawScatter() {
  guarded("f1-note", () => {
    const d = JSON.parse(fig1_scatter(num("f1-k"), num("f1-per"), big("f1-seed")));
    const xmax = (d.k * (d.k - 1)) / 2;
    const ymax = Math.ceil(Math.log10(Math.max(...d.points.map((p) => p.hafnian), ...d.bound.map((b) => b[1]), 10)));
    const { ctx, px, py } = frame(document.getElementById("f1"), xmax, 0, ymax, true, "edges", "perfect matchings");
    for (const p of d.points) {
      ctx.fillStyle = `hsla(${240 - 240 * p.p}, 70%, 45%, 0.35)`;
      ctx.beginPath();
      ctx.arc(px(p.edges), py(p.hafnian), 2.5, 0, 2 * Math.PI);
      ctx.fill();
    }
    polyline(ctx, d.bound.map(([l, b]) => [px(l), py(b)]), "#000", true);
    return `${d.points.length} graphs plotted, ${d.zero_rows} with no perfect matching left off the log axis; dashed: upper bound`;
  });
}

function drawHistograms() {
  guarded("h-note", () => {
    const d = JSON.parse(sample_histograms(big("h-gseed"), num("h-k"), num("h-draws"), big("h-seed")));
    const total = d.gbs.reduce((a, b) => a + b, 0);
    const ymax = Math.max(...d.gbs, ...d.uniform) / total;
    const { ctx, px, py } = frame(document.getElementById("hist"), d.max_edges + 1, 0, ymax, false, "edges in sampled subgraph", "fraction of draws");
    const bw = (px(1) - px(0)) / 2.4;
    d.gbs.forEach((c, e) => {
      ctx.fillStyle = GBS;
      ctx.fillRect(px(e + 0.5) - bw, py(c / total), bw, py(0) - py(c / total));
      ctx.fillStyle = UNIFORM;
      const u = d.uniform[e] / total;
      ctx.fillRect(px(e + 0.5), py(u), bw, py(0) - py(u));
    });
    return `red: Hafnian-weighted, grey: uniform. Samples inside the planted part: ${d.planted_hits_gbs} vs ${d.planted_hits_uniform}`;
  });
}

function drawCurves() {
  guarded("c-note", () => {
    const d = JSON.parse(search_curves(big("c-gseed"), num("c-k"), num("c-samples"), num("c-reps"), 1n));
    const all = [...d.gbs, ...d.uniform];
    const ymin = Math.floor(Math.min(...all));
    const ymax = Math.ceil(Math.max(...all)) + 0.5;
    const { ctx, px, py } = frame(document.getElementById("curves"), d.samples, ymin, ymax, false, "samples", "mean best edge count");
    polyline(ctx, d.gbs.map((v, i) => [px(i + 1), py(v)]), GBS, false);
    polyline(ctx, d.uniform.map((v, i) => [px(i + 1), py(v)]), UNIFORM, false);
    return `after ${d.samples} samples: ${d.gbs.at(-1).toFixed(2)} (Hafnian-weighted) vs ${d.uniform.at(-1).toFixed(2)} (uniform)`;
  });
}

await init();
document.getElementById("f1-run").onclick = drawScatter;
document.getElementById("h-run").onclick = drawHistograms;
document.getElementById("c-run").onclick = drawCurves;
drawScatter();
drawHistograms();
drawCurves();
