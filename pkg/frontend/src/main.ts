import { ApiClient } from "./api";
import { buildApp } from "./ui";
import "./style.css";

/** Default base image: a neutral checkered canvas rendered client-side. */
function defaultBaseB64(size = 256): string {
  const canvas = document.createElement("canvas");
  canvas.width = size;
  canvas.height = size;
  const ctx = canvas.getContext("2d");
  if (!ctx) throw new Error("no 2d context");
  for (let y = 0; y < size; y += 16) {
    for (let x = 0; x < size; x += 16) {
      ctx.fillStyle = ((x + y) / 16) % 2 === 0 ? "#d8d8d8" : "#b8b8b8";
      ctx.fillRect(x, y, 16, 16);
    }
  }
  return canvas.toDataURL("image/png").split(",", 2)[1];
}

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) throw new Error("#app missing");
  const client = new ApiClient("");
  const app = buildApp(root, client);

  const picker = document.getElementById("base-file") as HTMLInputElement | null;
  picker?.addEventListener("change", () => {
    const file = picker.files?.[0];
    if (!file) return;
    const reader = new FileReader();
    reader.onload = () => {
      const b64 = String(reader.result).split(",", 2)[1] ?? "";
      void app.openSession(b64);
    };
    reader.readAsDataURL(file);
  });

  await app.openSession(defaultBaseB64());
}

void boot();
