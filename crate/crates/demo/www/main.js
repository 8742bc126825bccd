// SPDX-License-Identifier: Apache-2.0
// Built with: wasm-bindgen --target web --out-dir www/pkg <scinov_demo.wasm>
import init, { Demo } from "./pkg/scinov_demo.js";

const $ = (id) => document.getElementById(id);
const palette = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"];
let demo = null;
let lastCorr = null;

function timed(label, f) {
  const t = performance.now();
  const out = f();
  $("status").textContent = `${label}: ${(performance.now() - t).toFixed(0)} ms`;
  return out;
}

function generate() {
  if (demo) demo.free();
  demo = null;
  try {
    demo = timed("generated", () => new Demo(
      +$("docs").value, +$("entities").value, +$("comms").value, BigInt($("seed").value)));
  } catch (e) {
    $("status").textContent = `error: ${e}`;
    return;
  }
  drawHistogram();
  drawCommunities();
  $("corr-table").textContent = "";
}

function drawHistogram() {
  const ctx = $("hist-canvas").getContext("2d");
  const { width, height } = ctx.canvas;
  ctx.clearRect(0, 0, width, height);
  let h;
  try {
    h = JSON.parse(timed("histogram", () => demo.histogram($("indicator").value, +$("bins").value)));
  } catch (e) {
    $("hist-caption").textContent = `error: ${e}`;
    return;
  }
  $("hist-caption").textContent =
    `${h.indicator} ${h.score}, ${h.scored} documents of ${h.year}, range ${h.edges[0].toFixed(3)} to ${h.edges[h.edges.length - 1].toFixed(3)}`;
  const max = Math.max(1, ...h.counts);
  const w = width / h.counts.length;
  ctx.fillStyle = palette[0];
  h.counts.forEach((c, i) => {
    const bh = (c / max) * (height - 10);
    ctx.fillRect(i * w + 1, height - bh, w - 2, bh);
  });
}

function drawCommunities() {
  const resolution = +$("resolution").value;
  $("resolution-value").textContent = resolution.toFixed(2);
  const c = JSON.parse(timed("communities", () => demo.communities(resolution)));
  $("comm-caption").textContent =
    `${c.community_count} communities, modularity ${c.modularity.toFixed(3)}`;
  const ctx = $("comm-canvas").getContext("2d");
  const { width, height } = ctx.canvas;
  ctx.clearRect(0, 0, width, height);

  // Place nodes on a circle, consecutive within a detected community.
  const order = c.nodes.map((n, i) => i).sort((a, b) => c.nodes[a].detected - c.nodes[b].detected || a - b);
  const pos = new Array(c.nodes.length);
  const r = Math.min(width, height) / 2 - 20;
  order.forEach((node, k) => {
    const t = (2 * Math.PI * k) / order.length;
    pos[node] = [width / 2 + r * Math.cos(t), height / 2 + r * Math.sin(t)];
  });
  const maxW = Math.max(1, ...c.edges.map((e) => e[2]));
  for (const [a, b, w] of c.edges) {
    const same = c.nodes[a].detected === c.nodes[b].detected;
    ctx.strokeStyle = same ? "rgba(0,0,0,0.35)" : "rgba(200,0,0,0.08)";
    ctx.lineWidth = 0.3 + (2 * w) / maxW;
    ctx.beginPath();
    ctx.moveTo(...pos[a]);
    ctx.lineTo(...pos[b]);
    ctx.stroke();
  }
  const maxDeg = Math.max(1, ...c.nodes.map((n) => n.degree));
  c.nodes.forEach((n, i) => {
    ctx.fillStyle = n.planted === null ? "#000" : palette[n.planted % palette.length];
    ctx.beginPath();
    ctx.arc(...pos[i], 3 + 6 * Math.sqrt(n.degree / maxDeg), 0, 2 * Math.PI);
    ctx.fill();
  });
}

function renderCorrelation() {
  if (!lastCorr) return;
  const method = document.querySelector("input[name=method]:checked").value;
  const m = lastCorr;
  const short = m.labels.map((l) => l.replace(":", " "));
  let html = "<table><tr><th></th>" + short.map((l) => `<th>${l}</th>`).join("") + "</tr>";
  m[method].forEach((row, i) => {
    html += `<tr><th>${short[i]}</th>`;
    row.forEach((v, j) => {
      const shade = v === null ? "#eee" : v >= 0 ? `rgba(31,119,180,${Math.abs(v)})` : `rgba(214,39,40,${Math.abs(v)})`;
      const text = v === null ? "n/a" : v.toFixed(2);
      html += `<td style="background:${shade}" title="n=${m.overlap[i][j]}">${text}</td>`;
    });
    html += "</tr>";
  });
  $("corr-table").innerHTML = html + "</table>";
}

function correlate() {
  try {
    lastCorr = JSON.parse(timed("correlation", () => demo.correlation()));
  } catch (e) {
    $("corr-table").textContent = `error: ${e}`;
    return;
  }
  renderCorrelation();
}

await init();
$("generate").addEventListener("click", generate);
$("hist").addEventListener("click", drawHistogram);
$("indicator").addEventListener("change", drawHistogram);
$("resolution").addEventListener("input", drawCommunities);
$("corr").addEventListener("click", correlate);
document.querySelectorAll("input[name=method]").forEach((el) => el.addEventListener("change", renderCorrelation));
generate();
