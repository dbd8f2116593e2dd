import init, { FlowDemo } from "./pkg/flowstyle_web.js";

const $ = (id) => document.getElementById(id);
let demo;
let side;

function status(msg) {
  $("status").textContent = msg;
}

function paint(id, rgba) {
  const canvas = $(id);
  canvas.width = side;
  canvas.height = side;
  const data = new ImageData(new Uint8ClampedArray(rgba.buffer, rgba.byteOffset, rgba.length), side, side);
  canvas.getContext("2d").putImageData(data, 0, 0);
}

function guard(fn) {
  return (...args) => {
    try {
      status("");
      fn(...args);
    } catch (e) {
      status(e.message ?? String(e));
    }
  };
}

const transfer = () => $("transfer").value;

function restyle() {
  const alpha = Number($("alpha").value);
  $("alpha-value").textContent = alpha.toFixed(2);
  paint("stylized", demo.stylize(transfer(), alpha));
}

function showInputs() {
  paint("content", demo.content_rgba());
  paint("style", demo.style_rgba());
  restyle();
}

function reseed() {
  demo?.free();
  demo = new FlowDemo(Number($("seed").value) >>> 0);
  showInputs();
}

async function loadFile(file, setter) {
  const bitmap = await createImageBitmap(file);
  const canvas = new OffscreenCanvas(side, side);
  const ctx = canvas.getContext("2d");
  const crop = Math.min(bitmap.width, bitmap.height);
  ctx.drawImage(bitmap, (bitmap.width - crop) / 2, (bitmap.height - crop) / 2, crop, crop, 0, 0, side, side);
  setter(new Uint8Array(ctx.getImageData(0, 0, side, side).data.buffer));
  showInputs();
}

function plotDrift(values) {
  const canvas = $("drift");
  const ctx = canvas.getContext("2d");
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  const logs = values.map((v) => Math.log10(Math.max(v, 1e-17)));
  const lo = Math.min(...logs, -16);
  const hi = Math.max(...logs, 0);
  const x = (i) => 30 + (i * (width - 40)) / Math.max(values.length - 1, 1);
  const y = (l) => height - 20 - ((l - lo) * (height - 30)) / (hi - lo);
  ctx.strokeStyle = "#999";
  ctx.fillStyle = "#555";
  ctx.font = "10px monospace";
  for (const l of [lo, -4, hi]) {
    ctx.beginPath();
    ctx.moveTo(30, y(l));
    ctx.lineTo(width - 10, y(l));
    ctx.stroke();
    ctx.fillText(`1e${Math.round(l)}`, 0, y(l) + 3);
  }
  ctx.strokeStyle = "#c33";
  ctx.beginPath();
  logs.forEach((l, i) => (i ? ctx.lineTo(x(i), y(l)) : ctx.moveTo(x(i), y(l))));
  ctx.stroke();
  $("drift-summary").textContent = `max drift from round 1: ${Math.max(...values).toExponential(2)}`;
}

async function main() {
  await init();
  side = FlowDemo.side();
  reseed();
  $("reseed").onclick = guard(reseed);
  $("transfer").onchange = guard(restyle);
  $("alpha").oninput = guard(restyle);
  $("content-file").onchange = (e) => loadFile(e.target.files[0], (px) => demo.set_content_rgba(px)).catch((err) => status(err.message));
  $("style-file").onchange = (e) => loadFile(e.target.files[0], (px) => demo.set_style_rgba(px)).catch((err) => status(err.message));
  $("run-drift").onclick = guard(() => plotDrift(Array.from(demo.drift_curve(transfer(), Number($("rounds").value)))));
  $("run-reverse").onclick = guard(() => {
    const error = demo.reverse(transfer());
    paint("rev-stylized", demo.reversed_stylized());
    paint("rev-recovered", demo.reversed_recovered());
    $("reverse-error").textContent = `max recovery error: ${error.toExponential(2)}`;
  });
}

main().catch((e) => status(e.message ?? String(e)));
