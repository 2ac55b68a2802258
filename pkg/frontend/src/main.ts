import { Api } from "./api.js";
import { App } from "./app.js";

const root = document.getElementById("app");
if (!root) throw new Error("missing #app container");
void new App(root, new Api(""), window.localStorage).boot();
