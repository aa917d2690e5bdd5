import init, { charfnModulusGrid, divisorSlice, multiplicativityCheck } from "./pkg/colligation_web.js";

const num = (id) => Number(document.getElementById(id).value);

function paint(canvas, values, color) {
  const res = canvas.width;
  const ctx = canvas.getContext("2d");
  const img = ctx.createImageData(res, res);
  values.forEach((v, i) => {
    const [r, g, b] = color(v);
    img.data.set([r, g, b, 255], 4 * i);
  });
  ctx.putImageData(img, 0, 0);
  return ctx;
}

function drawCharfn() {
  const canvas = document.getElementById("chi-canvas");
  const res = canvas.width;
  const extent = 2;
  const grid = charfnModulusGrid(num("chi-seed"), num("chi-n"), res, extent);
  const ctx = paint(canvas, grid, (v) => {
    if (Number.isNaN(v)) return [255, 255, 255];
    const t = Math.max(0, Math.min(1, Math.atan(Math.log(v)) / Math.PI + 0.5));
    const c = Math.round(255 * t);
    return [c, c, Math.round(80 + 120 * t)];
  });
  ctx.strokeStyle = "red";
  ctx.beginPath();
  ctx.arc(res / 2, res / 2, res / (2 * extent), 0, 2 * Math.PI);
  ctx.stroke();
}

function drawDivisor() {
  const canvas = document.getElementById("div-canvas");
  const grid = divisorSlice(num("div-seed"), num("div-n"), document.getElementById("div-embed").checked, canvas.width, 3);
  const finite = grid.filter(Number.isFinite);
  const lo = Math.max(Math.min(...finite), -6);
  const hi = Math.max(...finite);
  paint(canvas, grid, (v) => {
    if (!Number.isFinite(v) || v <= lo) return [0, 0, 0];
    const t = (v - lo) / (hi - lo || 1);
    return [Math.round(255 * t), Math.round(200 * Math.sqrt(t)), Math.round(255 * (1 - t))];
  });
}

function runCheck() {
  const out = document.getElementById("mul-out");
  try {
    const report = JSON.parse(
      multiplicativityCheck(num("mul-seed"), num("mul-alpha"), num("mul-m"), num("mul-n1"), num("mul-n2")),
    );
    out.textContent = JSON.stringify(report, null, 2);
  } catch (e) {
    out.textContent = String(e);
  }
}

await init();
document.getElementById("chi-draw").addEventListener("click", drawCharfn);
document.getElementById("div-draw").addEventListener("click", drawDivisor);
document.getElementById("mul-run").addEventListener("click", runCheck);
drawCharfn();
drawDivisor();
runCheck();
