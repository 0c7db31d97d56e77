import init, { instance, evaluate, optimize } from "./pkg/pnlsep_demo.js";

const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
const $ = (id) => document.getElementById(id);

function rows(m) {
  const out = [];
  for (let i = 0; i < m.rows; i++) out.push(m.data.slice(i * m.cols, (i + 1) * m.cols));
  return out;
}

// each series is scaled to its own range so shapes can be compared
function plotSeries(canvas, series, styles) {
  const g = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  g.clearRect(0, 0, w, h);
  series.forEach((s, k) => {
    const lo = Math.min(...s), hi = Math.max(...s), span = hi - lo || 1;
    g.strokeStyle = styles[k].color;
    g.setLineDash(styles[k].dash || []);
    g.lineWidth = 1.5;
    g.beginPath();
    s.forEach((v, t) => {
      const x = 10 + (t / (s.length - 1)) * (w - 20);
      const y = h - 10 - ((v - lo) / span) * (h - 20);
      t ? g.lineTo(x, y) : g.moveTo(x, y);
    });
    g.stroke();
  });
  g.setLineDash([]);
}

let current = null;

function showInstance() {
  const seed = Number($("seed").value);
  current = JSON.parse(instance(seed));
  const s = rows(current.sources), x = rows(current.mixtures);
  plotSeries($("signals"), [...s, ...x], [
    { color: COLORS[0] }, { color: COLORS[1] },
    { color: "#7f7f7f", dash: [4, 3] }, { color: "#bbbbbb", dash: [4, 3] },
  ]);
  showEstimate();
}

function showEstimate() {
  const d1 = Number($("d1").value), d2 = Number($("d2").value);
  $("d1v").textContent = d1.toFixed(2);
  $("d2v").textContent = d2.toFixed(2);
  let e;
  try {
    e = JSON.parse(evaluate(current.seed, d1, d2));
  } catch (err) {
    $("evalstats").textContent = String(err);
    return;
  }
  const s = rows(current.sources), y = rows(e.y);
  const perm = e.sir.permutation;
  plotSeries($("estimate"), [s[0], s[1], y[perm[0]], y[perm[1]]], [
    { color: COLORS[0] }, { color: COLORS[1] },
    { color: COLORS[0], dash: [5, 4] }, { color: COLORS[1], dash: [5, 4] },
  ]);
  const sir = e.sir.per_source.map((v) => Number(v).toFixed(2)).join(" / ");
  $("evalstats").textContent =
    `j1 = ${e.j1.toFixed(3)}   j2 = ${e.j2.toExponential(3)}   SIR = ${sir} dB (average ${Number(e.sir.average).toFixed(2)})\n` +
    "solid: true activities, dashed: matched estimates";
}

let bundle = null;

function drawFront(canvas, b) {
  const g = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  g.clearRect(0, 0, w, h);
  const pts = b.archive.map((e, i) => ({ e, i, kind: i === b.best_index ? "best" : "archive" }));
  pts.push({ e: b.baselines.nernst, kind: "nernst" }, { e: b.baselines.sobi_criterion, kind: "sobi" });
  // log scale on both axes; j1 may be zero
  const fx = (e) => Math.log10(e.j1 + 1e-3), fy = (e) => Math.log10(e.j2 + 1e-9);
  const xs = pts.map((p) => fx(p.e)), ys = pts.map((p) => fy(p.e));
  const [x0, x1, y0, y1] = [Math.min(...xs), Math.max(...xs), Math.min(...ys), Math.max(...ys)];
  const px = (v) => 30 + ((v - x0) / (x1 - x0 || 1)) * (w - 50);
  const py = (v) => h - 30 - ((v - y0) / (y1 - y0 || 1)) * (h - 50);
  g.fillStyle = "#444";
  g.fillText("log j1 (Nernstian distance)", w / 2 - 60, h - 8);
  g.save(); g.translate(12, h / 2 + 50); g.rotate(-Math.PI / 2); g.fillText("log j2 (off-diagonality)", 0, 0); g.restore();
  const style = { archive: "#1f77b4", best: "#ff7f0e", nernst: "#2ca02c", sobi: "#d62728" };
  canvas._hits = [];
  for (const p of pts) {
    const x = px(fx(p.e)), y = py(fy(p.e));
    g.fillStyle = style[p.kind];
    g.beginPath();
    if (p.kind === "archive" || p.kind === "best") g.arc(x, y, p.kind === "best" ? 6 : 4, 0, 2 * Math.PI);
    else g.rect(x - 5, y - 5, 10, 10);
    g.fill();
    canvas._hits.push({ x, y, p });
  }
}

function runSearch() {
  $("frontstats").textContent = "running...";
  setTimeout(() => {
    const t0 = performance.now();
    try {
      bundle = JSON.parse(optimize(current.seed, Number($("pop").value), Number($("arch").value), Number($("gens").value)));
    } catch (err) {
      $("frontstats").textContent = String(err);
      return;
    }
    drawFront($("front"), bundle);
    const avg = (e) => (e.sir ? Number(e.sir.average).toFixed(2) : "-");
    const best = bundle.archive[bundle.best_index];
    $("frontstats").textContent =
      `${bundle.archive.length} archive entries in ${(performance.now() - t0).toFixed(0)} ms\n` +
      `best (orange) ${avg(best)} dB   Nernst (green) ${avg(bundle.baselines.nernst)} dB   ` +
      `off-diagonality only (red) ${avg(bundle.baselines.sobi_criterion)} dB\n` +
      "Click a point to load its slopes above.";
  }, 10);
}

$("front").addEventListener("click", (ev) => {
  const c = ev.target, r = c.getBoundingClientRect();
  const x = ev.clientX - r.left, y = ev.clientY - r.top;
  let near = null, dist = 12;
  for (const hit of c._hits || []) {
    const d = Math.hypot(hit.x - x, hit.y - y);
    if (d < dist) { dist = d; near = hit; }
  }
  if (!near) return;
  const [d1, d2] = near.p.e.d_star;
  $("d1").value = d1;
  $("d2").value = d2;
  showEstimate();
});

await init();
$("seed").addEventListener("change", showInstance);
$("d1").addEventListener("input", showEstimate);
$("d2").addEventListener("input", showEstimate);
$("run").addEventListener("click", runSearch);
showInstance();
