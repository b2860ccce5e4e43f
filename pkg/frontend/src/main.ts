/**
 * Entry point: two pages behind a tab switch, page choice kept in the
 * URL hash so a reload restores the view from server state alone.
 */

import "katex/dist/katex.min.css";
import "highlight.js/styles/github.css";
import "./styles.css";

import { AnalyzePage } from "./analyze.js";
import { ApiClient } from "./api.js";
import { InferencePage } from "./inference.js";

export function mountApp(root: HTMLElement, api: ApiClient): {
  analyze: AnalyzePage;
  inference: InferencePage;
  show: (page: "analyze" | "inference") => void;
} {
  const doc = root.ownerDocument;
  root.innerHTML = `
    <header class="topbar">
      <span class="brand">genlens</span>
      <nav>
        <button id="tab-analyze" class="tab active" type="button">Analyze</button>
        <button id="tab-inference" class="tab" type="button">Inference</button>
      </nav>
    </header>
    <section id="page-analyze" class="page"></section>
    <section id="page-inference" class="page" style="display:none"></section>`;

  const analyze = new AnalyzePage(api, root.querySelector("#page-analyze") as HTMLElement);
  const inference = new InferencePage(api, root.querySelector("#page-inference") as HTMLElement);

  const show = (page: "analyze" | "inference"): void => {
    const isAnalyze = page === "analyze";
    (root.querySelector("#page-analyze") as HTMLElement).style.display = isAnalyze ? "" : "none";
    (root.querySelector("#page-inference") as HTMLElement).style.display = isAnalyze ? "none" : "";
    root.querySelector("#tab-analyze")!.className = isAnalyze ? "tab active" : "tab";
    root.querySelector("#tab-inference")!.className = isAnalyze ? "tab" : "tab active";
    if (doc.defaultView) doc.defaultView.location.hash = page;
  };

  root.querySelector("#tab-analyze")!.addEventListener("click", () => show("analyze"));
  root.querySelector("#tab-inference")!.addEventListener("click", () => show("inference"));

  const hash = doc.defaultView?.location.hash.replace("#", "");
  if (hash === "inference") show("inference");

  return { analyze, inference, show };
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  mountApp(document.getElementById("app") as HTMLElement, new ApiClient(""));
}
