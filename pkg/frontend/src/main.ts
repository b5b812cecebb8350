import { App } from "./ui.js";

const root = document.getElementById("app");
if (root) {
  const app = new App(root);
  app.render();
}
