import init, { spectrum, witness_sweep, cyclerun_build } from "./pkg/resil_web.js";

const fmt = (x) => (typeof x === "number" ? x.toPrecision(6) : String(x));

function table(headers, rows) {
  const head = headers.map((h) => `<th>${h}</th>`).join("");
  const body = rows.map((r) => `<tr>${r.map((c) => `<td>${fmt(c)}</td>`).join("")}</tr>`).join("");
  return `<table><tr>${head}</tr>${body}</table>`;
}

function bars(canvas, values, color) {
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const max = Math.max(...values.map(Math.abs), 1e-12);
  const w = canvas.width / values.length;
  ctx.fillStyle = color;
  values.forEach((v, i) => {
    const h = (Math.abs(v) / max) * (canvas.height - 10);
    ctx.fillRect(i * w + 1, canvas.height - h, Math.max(w - 2, 1), h);
  });
}

function run(formId, outId, body) {
  const form = document.getElementById(formId);
  const out = document.getElementById(outId);
  form.addEventListener("submit", (ev) => {
    ev.preventDefault();
    const data = Object.fromEntries(new FormData(form));
    try {
      out.innerHTML = body(data);
    } catch (e) {
      out.innerHTML = `<p class="error">${e.message ?? e}</p>`;
    }
  });
}

await init();

run("spectrum-form", "spectrum-out", ({ spec }) => {
  const r = JSON.parse(spectrum(spec));
  bars(document.getElementById("levels"), r.level_weights, "#3a6ea5");
  return (
    `<p>n = ${r.n}, total influence ${fmt(r.influence)}, resilience order ${r.resilience_order ?? "none"}</p>` +
    table(["level", "weight"], r.level_weights.map((w, k) => [k, w])) +
    table(["set", "coefficient"], r.top.map((c) => [c.set, c.coefficient]))
  );
});

run("witness-form", "witness-out", ({ spec, d, taus }) => {
  const r = JSON.parse(witness_sweep(spec, Number(d), taus));
  const rows = r.rows.map((x) =>
    x.status === "ok"
      ? [x.tau, x.delta_emp, x.corr_qf, x.corr_qf_bound, x.corr_pf, x.certified ? "yes" : "no"]
      : [x.tau, "-", "-", "-", "-", x.message],
  );
  const lp = r.lp_optimum === null ? "" : `<p>LP optimum of E[pf]: ${fmt(r.lp_optimum)}</p>`;
  return lp + table(["τ", "δ", "E[qf]", "(1−τ)(1−δ)", "E[pf]", "certified"], rows);
});

run("build-form", "build-out", ({ n, c1 }) => {
  const r = JSON.parse(cyclerun_build(Number(n), Number(c1)));
  bars(document.getElementById("sigma"), r.sigma_trace, "#a5573a");
  const ok = r.audit_holds && r.final_sigma === 0 && r.first_level_certificate.every((c) => c === 0);
  return (
    `<p class="${ok ? "ok" : "error"}">${ok ? "balanced and 1-resilient" : "certificate failed"}</p>` +
    table(
      ["iterations", "flipped", "distance", "ratio", "budget used"],
      [[r.iterations, r.flipped_points, r.distance, r.distance_ratio, r.budget_used]],
    )
  );
});
