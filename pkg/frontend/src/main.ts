// Entry point for the dev server. Reads launch parameters from the query
// string, shows a small launcher, and hands the tab over to a Studio.
// ?api=http://host:port points at the session service (defaults to same
// origin, which the vite dev server proxies).

import { StudioApi } from "./api";
import type { Condition } from "./api";
import { Studio } from "./app";

const params = new URLSearchParams(window.location.search);
const api = new StudioApi(params.get("api") ?? "");
const root = document.getElementById("app");
if (!root) throw new Error("missing #app element");

const studio = new Studio(api, root, {
  showFeedback: params.get("feedback") !== "off",
});

function option(value: string): HTMLOptionElement {
  const opt = document.createElement("option");
  opt.value = value;
  opt.textContent = value;
  return opt;
}

async function launcher(): Promise<void> {
  const { envs } = await api.listEnvs();

  const form = document.createElement("div");
  form.className = "launcher";
  const title = document.createElement("h1");
  title.textContent = "Task studio";
  form.appendChild(title);

  const envSelect = document.createElement("select");
  envSelect.className = "env-select";
  for (const env of envs) envSelect.appendChild(option(env));
  const conditionSelect = document.createElement("select");
  conditionSelect.className = "condition-select";
  conditionSelect.appendChild(option("aided"));
  conditionSelect.appendChild(option("control"));

  const startTrial = document.createElement("button");
  startTrial.textContent = "Start one trial";
  startTrial.addEventListener("click", () => {
    void studio.startSession(envSelect.value, conditionSelect.value as Condition);
  });

  const startStudy = document.createElement("button");
  startStudy.textContent = "Start a study (2 trials per block)";
  startStudy.addEventListener("click", () => {
    void studio.startStudy(conditionSelect.value as Condition, ["mortgage", "roadtrip"], 2);
  });

  form.appendChild(envSelect);
  form.appendChild(conditionSelect);
  form.appendChild(startTrial);
  form.appendChild(startStudy);
  root!.replaceChildren(form);
}

const env = params.get("env");
const condition = (params.get("condition") ?? "aided") as Condition;
if (env) {
  void studio.startSession(env, condition);
} else {
  void launcher();
}
