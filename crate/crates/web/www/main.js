import init, { lifetimeCurves, allanCurves, squeezedEllipse } from "./pkg/squeezed_clock_web.js";

const $ = (id) => document.getElementById(id);
const COLORS = {
  css_ramsey: "#444",
  phase_squeezed_ramsey: "#c0392b",
  number_squeezed_hold: "#2471a3",
  echo_ramsey: "#1e8449",
  css: "#444",
  squeezed: "#c0392b",
};

function show(id, text, isError = false) {
  const el = $(id);
  el.textContent = text;
  el.className = isError ? "readout error" : "readout";
}

// Plot frame with optional log axes; returns a mapping from data to pixels.
function frame(ctx, { xmin, xmax, ymin, ymax, logx = false, logy = false, xlabel, ylabel }) {
  const { width, height } = ctx.canvas;
  const m = { l: 70, r: 20, t: 15, b: 40 };
  const fx = logx ? Math.log10 : (v) => v;
  const fy = logy ? Math.log10 : (v) => v;
  const [x0, x1, y0, y1] = [fx(xmin), fx(xmax), fy(ymin), fy(ymax)];
  const px = (x) => m.l + ((fx(x) - x0) / (x1 - x0)) * (width - m.l - m.r);
  const py = (y) => height - m.b - ((fy(y) - y0) / (y1 - y0)) * (height - m.t - m.b);
  ctx.clearRect(0, 0, width, height);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(m.l, m.t, width - m.l - m.r, height - m.t - m.b);
  ctx.fillStyle = "#333";
  ctx.font = "12px system-ui";
  const ticks = (lo, hi, log) =>
    log
      ? Array.from({ length: Math.floor(hi) - Math.ceil(lo) + 1 }, (_, i) => 10 ** (Math.ceil(lo) + i))
      : Array.from({ length: 6 }, (_, i) => lo + ((hi - lo) * i) / 5);
  for (const t of ticks(x0, x1, logx)) {
    ctx.fillText(logx ? t.toExponential(0) : t.toFixed(1), px(t) - 12, height - m.b + 16);
  }
  for (const t of ticks(y0, y1, logy)) {
    ctx.fillText(logy ? t.toExponential(0) : t.toFixed(2), 5, py(t) + 4);
  }
  ctx.fillText(xlabel, width / 2 - 30, height - 6);
  ctx.save();
  ctx.translate(14, height / 2 + 30);
  ctx.rotate(-Math.PI / 2);
  ctx.fillText(ylabel, 0, 0);
  ctx.restore();
  return { px, py };
}

function line(ctx, map, xs, ys, color, dash = []) {
  ctx.strokeStyle = color;
  ctx.setLineDash(dash);
  ctx.lineWidth = 2;
  ctx.beginPath();
  xs.forEach((x, i) => (i ? ctx.lineTo(map.px(x), map.py(ys[i])) : ctx.moveTo(map.px(x), map.py(ys[i]))));
  ctx.stroke();
  ctx.setLineDash([]);
}

function drawEllipse() {
  const q = +$("e-q").value, x = +$("e-x").value, c = +$("e-c").value;
  $("e-q-v").textContent = q.toFixed(2);
  $("e-x-v").textContent = x.toFixed(2);
  $("e-c-v").textContent = c.toFixed(2);
  let e;
  try {
    e = JSON.parse(squeezedEllipse(q, x, c));
  } catch (err) {
    return show("e-out", err.message, true);
  }
  const ctx = $("e-canvas").getContext("2d");
  const { width, height } = ctx.canvas;
  const scale = Math.min(width, height) / 2 / Math.max(1.2, Math.sqrt(e.wide) * 1.1);
  ctx.clearRect(0, 0, width, height);
  ctx.strokeStyle = "#ccc";
  ctx.beginPath();
  ctx.moveTo(0, height / 2); ctx.lineTo(width, height / 2);
  ctx.moveTo(width / 2, 0); ctx.lineTo(width / 2, height);
  ctx.stroke();
  ctx.strokeStyle = "#888";
  ctx.setLineDash([4, 4]);
  ctx.beginPath();
  ctx.arc(width / 2, height / 2, scale, 0, 2 * Math.PI);
  ctx.stroke();
  ctx.setLineDash([]);
  ctx.strokeStyle = COLORS.squeezed;
  ctx.lineWidth = 2;
  ctx.beginPath();
  e.outline.forEach(([phi, z], i) => {
    const X = width / 2 + phi * scale, Y = height / 2 - z * scale;
    i ? ctx.lineTo(X, Y) : ctx.moveTo(X, Y);
  });
  ctx.stroke();
  ctx.fillStyle = "#333";
  ctx.fillText("S_phi", width - 40, height / 2 - 6);
  ctx.fillText("S_z", width / 2 + 6, 14);
  show(
    "e-out",
    `narrow variance ${e.narrow.toFixed(4)}   wide variance ${e.wide.toFixed(3)}   ` +
      `narrow axis ${((e.angle_rad * 180) / Math.PI).toFixed(1)} deg from S_z\n` +
      `best squeezing parameter ${e.zeta_db.toFixed(2)} dB (dashed: coherent state)`
  );
}

function drawLifetime() {
  const tmax = +$("l-tmax").value;
  let data;
  try {
    data = JSON.parse(lifetimeCurves(+$("l-dw").value, +$("l-z0").value, +$("l-tc").value, tmax, 401));
  } catch (err) {
    return show("l-out", err.message, true);
  }
  const ctx = $("l-canvas").getContext("2d");
  const map = frame(ctx, {
    xmin: 0, xmax: tmax, ymin: 0.1, ymax: 10, logy: true,
    xlabel: "hold time (ms)", ylabel: "squeezing parameter",
  });
  line(ctx, map, [0, tmax], [1, 1], "#aaa", [6, 4]);
  const lines = [];
  for (const c of data.curves) {
    const keep = c.zeta.map((z, i) => [data.t_ms[i], Math.min(Math.max(z, 0.1), 10)]);
    line(ctx, map, keep.map((p) => p[0]), keep.map((p) => p[1]), COLORS[c.preset]);
    const life = c.lifetime_ms == null ? "-" : `${c.lifetime_ms.toFixed(3)} ms`;
    lines.push(`${c.preset.padEnd(24)} zeta = 1 at ${life}`);
  }
  show("l-out", lines.join("\n") + "\n(grey: coherent state, red: phase squeezed, blue: number squeezed, green: echo)");
}

function drawAllan() {
  show("a-out", "simulating...");
  setTimeout(() => {
    let d;
    try {
      d = JSON.parse(allanCurves(+$("a-n").value, +$("a-d").value, +$("a-g").value, +$("a-s").value >>> 0));
    } catch (err) {
      return show("a-out", err.message, true);
    }
    const ctx = $("a-canvas").getContext("2d");
    const all = [...d.css.sigma, ...d.squeezed.sigma, ...d.sql].filter((v) => v > 0);
    const map = frame(ctx, {
      xmin: d.tau_s[0] / 1.5, xmax: d.tau_s[d.tau_s.length - 1] * 1.5,
      ymin: Math.min(...all) / 2, ymax: Math.max(...all) * 2, logx: true, logy: true,
      xlabel: "averaging time (s)", ylabel: "Allan deviation",
    });
    line(ctx, map, d.tau_s, d.sql, "#444", [6, 4]);
    line(ctx, map, d.tau_s, d.squeezed_reference, COLORS.squeezed, [2, 4]);
    for (const name of ["css", "squeezed"]) {
      const c = d[name];
      line(ctx, map, d.tau_s, c.sigma, COLORS[name]);
      ctx.strokeStyle = COLORS[name];
      d.tau_s.forEach((t, i) => {
        ctx.beginPath();
        ctx.moveTo(map.px(t), map.py(c.ci_lo[i]));
        ctx.lineTo(map.px(t), map.py(c.ci_hi[i]));
        ctx.stroke();
      });
    }
    const k = (s) => (s[0] * Math.sqrt(d.tau_s[0])).toExponential(3);
    show(
      "a-out",
      `sigma * sqrt(tau) at ${d.tau_s[0]} s: coherent ${k(d.css.sigma)}, squeezed ${k(d.squeezed.sigma)}, ` +
        `reference ${k(d.sql)}\n(dashed: projection limit at full contrast, dotted: limit lowered by the squeezing gain)`
    );
  }, 10);
}

await init();
for (const id of ["e-q", "e-x", "e-c"]) $(id).addEventListener("input", drawEllipse);
$("l-run").addEventListener("click", drawLifetime);
$("a-run").addEventListener("click", drawAllan);
drawEllipse();
drawLifetime();
drawAllan();
