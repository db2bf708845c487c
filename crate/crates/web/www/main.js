import init, { entropyCurves, simulateRmt, uHistogram } from "./pkg/entangle_web.js";

const W = 640, H = 360, M = { l: 55, r: 15, t: 15, b: 45 };
const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function frame(xmax, ymax, xlabel, ylabel) {
  const sx = (x) => M.l + (x / xmax) * (W - M.l - M.r);
  const sy = (y) => H - M.b - (y / ymax) * (H - M.t - M.b);
  let s = `<svg width="${W}" height="${H}" viewBox="0 0 ${W} ${H}">`;
  s += `<line x1="${M.l}" y1="${H - M.b}" x2="${W - M.r}" y2="${H - M.b}" stroke="#000"/>`;
  s += `<line x1="${M.l}" y1="${M.t}" x2="${M.l}" y2="${H - M.b}" stroke="#000"/>`;
  for (let i = 0; i <= 4; i++) {
    const x = (xmax * i) / 4, y = (ymax * i) / 4;
    s += `<text x="${sx(x)}" y="${H - M.b + 16}" font-size="11" text-anchor="middle">${+x.toPrecision(3)}</text>`;
    s += `<text x="${M.l - 6}" y="${sy(y) + 4}" font-size="11" text-anchor="end">${+y.toPrecision(3)}</text>`;
  }
  s += `<text x="${(W + M.l) / 2}" y="${H - 8}" font-size="13" text-anchor="middle">${xlabel}</text>`;
  s += `<text x="14" y="${(H - M.b) / 2}" font-size="13" transform="rotate(-90 14 ${(H - M.b) / 2})" text-anchor="middle">${ylabel}</text>`;
  return { sx, sy, svg: s };
}

function showError(target, e) {
  $(target).innerHTML = `<p class="err">${String(e.message ?? e)}</p>`;
}

function drawCurves() {
  try {
    const curves = JSON.parse(entropyCurves(num("curve-n"), 4, num("curve-x"), 201));
    const ymax = Math.max(...curves.map((c) => c.saturation)) * 1.1;
    const f = frame(num("curve-x"), ymax, "√Λ", "S_k");
    let s = f.svg;
    curves.forEach((c, i) => {
      const d = c.sqrt_lambda.map((x, j) => `${j ? "L" : "M"}${f.sx(x)},${f.sy(c.entropy[j])}`).join("");
      s += `<path d="${d}" fill="none" stroke="${COLORS[i]}" stroke-width="2"/>`;
      s += `<text x="${W - M.r - 40}" y="${M.t + 16 * (i + 1)}" fill="${COLORS[i]}" font-size="12">S${c.k}</text>`;
    });
    $("curve-plot").innerHTML = s + "</svg>";
  } catch (e) {
    showError("curve-plot", e);
  }
}

function runSimulation() {
  $("sim-out").textContent = "running…";
  setTimeout(() => {
    try {
      const r = JSON.parse(simulateRmt(num("sim-n"), num("sim-lambda"), num("sim-r"), BigInt(num("sim-seed"))));
      let t = "<table><tr><th>k</th><th>simulated</th><th>± stderr</th><th>theory</th></tr>";
      for (const e of r.entropies) {
        t += `<tr><td>${e.k}</td><td>${e.mean.toFixed(4)}</td><td>${e.stderr.toFixed(4)}</td><td>${e.theory?.toFixed(4) ?? "–"}</td></tr>`;
      }
      t += `</table><p>⟨λ₁⟩ = ${r.lambda1.toFixed(5)} ± ${r.lambda1_stderr.toFixed(5)}</p>`;
      $("sim-out").innerHTML = t;
    } catch (e) {
      showError("sim-out", e);
    }
  }, 10);
}

function drawU() {
  try {
    const h = JSON.parse(uHistogram(num("u-lambda"), num("u-draws"), BigInt(num("u-seed"))));
    const xmax = h.edges[h.edges.length - 1];
    const ymax = Math.max(...h.density, ...h.theory) * 1.1;
    const f = frame(xmax, ymax, "u", "density");
    let s = f.svg;
    h.density.forEach((d, i) => {
      const x0 = f.sx(h.edges[i]), x1 = f.sx(h.edges[i + 1]);
      s += `<rect x="${x0}" y="${f.sy(d)}" width="${x1 - x0}" height="${f.sy(0) - f.sy(d)}" fill="#9ecae1" stroke="#6baed6"/>`;
    });
    const d = h.theory.map((y, i) => `${i ? "L" : "M"}${f.sx((h.edges[i] + h.edges[i + 1]) / 2)},${f.sy(y)}`).join("");
    s += `<path d="${d}" fill="none" stroke="#d62728" stroke-width="2"/>`;
    $("u-plot").innerHTML = s + "</svg>";
  } catch (e) {
    showError("u-plot", e);
  }
}

await init();
$("curve-go").onclick = drawCurves;
$("sim-go").onclick = runSimulation;
$("u-go").onclick = drawU;
drawCurves();
drawU();
