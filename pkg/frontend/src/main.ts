import "./style.css";
import { ApiClient } from "./api";
import { Shelf } from "./shelf";

const api = new ApiClient("");
const picker = document.getElementById("pod-picker")!;
const shelfRoot = document.getElementById("shelf")!;
const shelf = new Shelf(api, shelfRoot);

async function refreshPodList(): Promise<void> {
  picker.replaceChildren();
  let pods;
  try {
    pods = await api.listPods();
  } catch (error) {
    picker.textContent = `Server unreachable: ${String(error)}`;
    return;
  }
  if (pods.length === 0) {
    picker.textContent = "No pods uploaded yet. POST an .mpod file to /pods.";
    return;
  }
  for (const entry of pods) {
    const row = document.createElement("div");
    row.className = "pod-row";
    const label = document.createElement("span");
    label.textContent = `${entry.title} · ${entry.annotation_count} annotations`;
    const add = document.createElement("button");
    add.type = "button";
    add.textContent = "Add to shelf";
    add.addEventListener("click", () => void shelf.add(entry));
    row.appendChild(label);
    row.appendChild(add);
    picker.appendChild(row);
  }
}

document.getElementById("reload-pods")!.addEventListener("click", () => void refreshPodList());
void refreshPodList();
