/**
 * Console bootstrap: reading pages with the tool rail, page-level capture
 * (navigation, scrolls, clicks, sparse mouse moves), and the scaffold poll
 * loop. Session identity comes from the query string or is generated once;
 * no other state survives a reload.
 */

import { ScaffoldClient } from "./api.js";
import { EventRecorder } from "./recorder.js";
import { AnnotationTool } from "./tools/annotation.js";
import { WritingPad } from "./tools/editor.js";
import { PlannerTool } from "./tools/planner.js";
import { ScaffoldUI } from "./tools/scaffold.js";
import { TimerTool } from "./tools/timer.js";

const PAGES: Record<string, { title: string; body: string }> = {
  "/instructions": {
    title: "Task instructions",
    body: "Read the three topics and write a 300-400 word essay on learning in 2035. " +
      "Use the tools on the right to annotate, plan, and keep an eye on the time.",
  },
  "/rubric": {
    title: "Essay rubric",
    body: "Your essay is scored on coverage of all three topics, integration across " +
      "them, use of evidence from the readings, and clarity of writing.",
  },
  "/contents": {
    title: "Table of contents",
    body: "",
  },
  "/reading/p1": { title: "Topic 1: artificial intelligence", body: loremTopic(1) },
  "/reading/p2": { title: "Topic 2: differentiation in the classroom", body: loremTopic(2) },
  "/reading/p3": { title: "Topic 3: scaffolding", body: loremTopic(3) },
};

function loremTopic(n: number): string {
  return `Reading material for topic ${n}. `.repeat(40);
}

export interface ConsoleConfig {
  baseUrl: string;
  sessionId: string;
  userId: string;
  condition: "generalised" | "personalised";
  taskDurationMs: number;
  pollIntervalMs: number;
}

export function bootConsole(root: HTMLElement, config: ConsoleConfig): {
  recorder: EventRecorder;
  scaffoldUi: ScaffoldUI;
  navigate: (page: string) => void;
} {
  const startedAt = Date.now();
  const clock = () => Date.now() - startedAt;
  let currentPage = "/contents";

  const recorder = new EventRecorder({
    baseUrl: config.baseUrl,
    sessionId: config.sessionId,
    userId: config.userId,
    clock,
    onError: (message) => console.warn(message),
    onOverflow: () => showBanner(root, "event buffer full: interactions are being dropped"),
  });

  root.innerHTML = "";
  const nav = document.createElement("nav");
  nav.className = "page-nav";
  const article = document.createElement("article");
  article.className = "reading-area";
  const rail = document.createElement("aside");
  rail.className = "tool-rail";
  root.append(nav, article, rail);

  const navigate = (page: string): void => {
    if (!(page in PAGES)) return;
    currentPage = page;
    recorder.record("navigation", page, {});
    const content = PAGES[page];
    article.innerHTML = "";
    const h = document.createElement("h2");
    h.textContent = content.title;
    const p = document.createElement("p");
    p.textContent = content.body;
    article.append(h, p);
    if (page === "/contents") {
      for (const target of Object.keys(PAGES)) {
        if (target === "/contents") continue;
        const link = document.createElement("button");
        link.className = "toc-link";
        link.textContent = PAGES[target].title;
        link.addEventListener("click", () => navigate(target));
        article.appendChild(link);
      }
    }
  };

  for (const page of Object.keys(PAGES)) {
    const link = document.createElement("button");
    link.textContent = PAGES[page].title;
    link.addEventListener("click", () => navigate(page));
    nav.appendChild(link);
  }

  article.addEventListener("scroll", throttle(() => {
    recorder.record("scroll", currentPage, {});
  }, 1000));
  article.addEventListener("click", () => {
    recorder.record("mouse_click", currentPage, {});
  });
  article.addEventListener("mousemove", throttle(() => {
    recorder.record("mouse_move", currentPage, {});
  }, 5000));

  const annotation = new AnnotationTool(recorder, rail, () => currentPage);
  annotation.mount(article);

  const search = document.createElement("input");
  search.className = "annotation-search";
  search.placeholder = "search annotations";
  search.addEventListener("change", () => annotation.search(search.value));
  rail.appendChild(search);

  const timer = new TimerTool(
    recorder, rail, () => currentPage,
    () => config.taskDurationMs - clock(),
  );
  timer.mount();

  const planner = new PlannerTool(recorder, rail, () => currentPage);
  planner.mount();

  const pad = new WritingPad(recorder, rail, () => currentPage);
  pad.mount();

  const scaffoldClient = new ScaffoldClient({
    baseUrl: config.baseUrl,
    sessionId: config.sessionId,
    userId: config.userId,
    condition: config.condition,
  });
  const scaffoldUi = new ScaffoldUI(scaffoldClient, rail, clock,
    (message) => console.warn(message));
  const pollLoop = setInterval(() => void scaffoldUi.poll(), config.pollIntervalMs);
  window.addEventListener("beforeunload", () => {
    clearInterval(pollLoop);
    void recorder.flush();
  });

  navigate("/contents");
  return { recorder, scaffoldUi, navigate };
}

function showBanner(root: HTMLElement, message: string): void {
  let banner = root.querySelector<HTMLElement>(".console-banner");
  if (!banner) {
    banner = document.createElement("div");
    banner.className = "console-banner";
    root.prepend(banner);
  }
  banner.textContent = message;
}

function throttle(fn: () => void, everyMs: number): () => void {
  let last = 0;
  return () => {
    const now = Date.now();
    if (now - last >= everyMs) {
      last = now;
      fn();
    }
  };
}

// Browser entry point; tests import bootConsole directly instead.
if (typeof document !== "undefined" && document.getElementById("console-root")) {
  const params = new URLSearchParams(window.location.search);
  bootConsole(document.getElementById("console-root") as HTMLElement, {
    baseUrl: params.get("engine") ?? "",
    sessionId: params.get("session") ?? `web-${Math.random().toString(36).slice(2, 10)}`,
    userId: params.get("user") ?? "learner",
    condition: (params.get("condition") as "generalised" | "personalised") ?? "generalised",
    taskDurationMs: Number(params.get("task_minutes") ?? 45) * 60_000,
    pollIntervalMs: Number(params.get("poll_seconds") ?? 10) * 1000,
  });
}
