import init, { stackTableaux, standardTableaux, fibreClasses } from "./pkg/springer_wasm.js";

const $ = (id) => document.getElementById(id);

function young(rows, caption) {
  const wrap = document.createElement("div");
  const table = document.createElement("table");
  table.className = "yt";
  for (const row of rows) {
    const tr = table.insertRow();
    for (const entry of row) tr.insertCell().textContent = entry;
  }
  wrap.append(table);
  if (caption) {
    const c = document.createElement("div");
    c.className = "caption";
    c.textContent = caption;
    wrap.append(c);
  }
  return wrap;
}

function run(button, output, work) {
  $(button).addEventListener("click", () => {
    const out = $(output);
    out.replaceChildren();
    try {
      work(out);
    } catch (err) {
      const p = document.createElement("p");
      p.className = "error";
      p.textContent = String(err);
      out.append(p);
    }
  });
}

await init();

run("stack-run", "stack-out", (out) => {
  const res = JSON.parse(stackTableaux($("stack-blocks").value, $("stack-shape").value, $("stack-tuple").value));
  out.append(young(res.tableau, `shape (${res.shape.join(",")})`));
});

run("enum-run", "enum-out", (out) => {
  const res = JSON.parse(standardTableaux($("enum-shape").value));
  const list = document.createElement("div");
  list.className = "tableaux";
  res.tableaux.forEach((t, i) => list.append(young(t, `#${i + 1}`)));
  out.append(`${res.count} tableaux, ascending:`, list);
});

run("fibre-run", "fibre-out", (out) => {
  const res = JSON.parse(fibreClasses($("fibre-shape").value, Number($("fibre-p").value)));
  const summary = document.createElement("p");
  summary.textContent = `${res.total_flags} flags in the fibre of a nilpotent of type (${res.shape.join(",")}) over F_${res.p}`;
  const table = document.createElement("table");
  table.className = "counts";
  for (const cls of res.classes) {
    const tr = table.insertRow();
    tr.insertCell().append(young(cls.tableau));
    tr.insertCell().textContent = `${cls.count} flags`;
  }
  out.append(summary, table);
});
