/** DOM shell: loading, input handling, hotspot overlay, error banner.
 *
 * Serve a directory containing index.html + the bundled scripts next to a
 * tour.json and its panorama images; `?tour=<url>` overrides the source.
 */

import { createGlRenderer, EquirectTexture, GlRenderer, renderPerspective } from "./render.js";
import {
  ViewerState,
  applyHash,
  createState,
  currentPanorama,
  encodeHash,
  goBack,
  navigate,
  setView,
  visibleHotspots,
} from "./state.js";
import { parseTourText } from "./tour.js";
import { TourHotspot, TourValidationError } from "./types.js";

class ViewerApp {
  private state!: ViewerState;
  private canvas: HTMLCanvasElement;
  private overlay: HTMLDivElement;
  private banner: HTMLDivElement;
  private gl: GlRenderer | null = null;
  private ctx2d: CanvasRenderingContext2D | null = null;
  private textures = new Map<string, HTMLImageElement>();
  private cpuTex: EquirectTexture | null = null;
  private baseUrl = "";
  private dragging: { x: number; y: number } | null = null;
  private fading = 0;

  constructor(private root: HTMLElement) {
    this.canvas = document.createElement("canvas");
    this.canvas.className = "viewer-canvas";
    this.overlay = document.createElement("div");
    this.overlay.className = "hotspot-overlay";
    this.banner = document.createElement("div");
    this.banner.className = "error-banner";
    this.banner.hidden = true;
    root.append(this.canvas, this.overlay, this.banner);

    this.gl = createGlRenderer(this.canvas);
    if (!this.gl) this.ctx2d = this.canvas.getContext("2d");

    this.canvas.addEventListener("pointerdown", (e) => {
      this.dragging = { x: e.clientX, y: e.clientY };
      this.canvas.setPointerCapture(e.pointerId);
    });
    this.canvas.addEventListener("pointermove", (e) => {
      if (!this.dragging) return;
      const degPerPx = this.state.view.fovDeg / this.canvas.clientWidth;
      this.state = setView(this.state, {
        yawDeg: this.state.view.yawDeg - (e.clientX - this.dragging.x) * degPerPx,
        pitchDeg: this.state.view.pitchDeg + (e.clientY - this.dragging.y) * degPerPx,
      });
      this.dragging = { x: e.clientX, y: e.clientY };
      this.syncHash();
      this.draw();
    });
    this.canvas.addEventListener("pointerup", () => (this.dragging = null));
    this.canvas.addEventListener("wheel", (e) => {
      e.preventDefault();
      this.state = setView(this.state, { fovDeg: this.state.view.fovDeg + e.deltaY * 0.05 });
      this.draw();
    });
    window.addEventListener("resize", () => this.draw());
    window.addEventListener("keydown", (e) => {
      if (e.key === "Backspace" || e.key === "Escape") this.back();
    });
  }

  async load(tourUrl: string): Promise<void> {
    this.baseUrl = tourUrl.slice(0, tourUrl.lastIndexOf("/") + 1);
    let text: string;
    try {
      const resp = await fetch(tourUrl);
      if (!resp.ok) throw new Error(`HTTP ${resp.status}`);
      text = await resp.text();
    } catch (e) {
      this.showError(`Could not fetch ${tourUrl}: ${(e as Error).message}`);
      return;
    }
    try {
      const tour = parseTourText(text);
      this.state = applyHash(createState(tour), location.hash);
    } catch (e) {
      if (e instanceof TourValidationError) {
        this.showError(`Invalid tour (${e.path}): ${e.message}`);
      } else {
        this.showError(`Invalid tour: ${(e as Error).message}`);
      }
      return;
    }
    this.buildChrome();
    await this.showCurrent();
  }

  private showError(message: string): void {
    this.banner.textContent = message;
    this.banner.hidden = false;
  }

  private buildChrome(): void {
    const bar = document.createElement("div");
    bar.className = "toolbar";
    const backBtn = document.createElement("button");
    backBtn.textContent = "← back";
    backBtn.addEventListener("click", () => this.back());
    const label = document.createElement("span");
    label.className = "pano-label";
    bar.append(backBtn, label);
    this.root.append(bar);
  }

  private back(): void {
    const prev = this.state;
    this.state = goBack(this.state);
    if (this.state !== prev) void this.showCurrent();
  }

  private async texture(file: string): Promise<HTMLImageElement> {
    const cached = this.textures.get(file);
    if (cached) return cached;
    const img = new Image();
    img.crossOrigin = "anonymous";
    img.src = this.baseUrl + file;
    await img.decode();
    this.textures.set(file, img);
    return img;
  }

  private async showCurrent(): Promise<void> {
    const pano = currentPanorama(this.state);
    const label = this.root.querySelector(".pano-label");
    if (label) label.textContent = `${pano.id} (tag ${pano.anchor_tag})`;
    try {
      const img = await this.texture(pano.file);
      this.banner.hidden = true;
      if (this.gl) {
        this.gl.setTexture(img);
      } else if (this.ctx2d) {
        const off = document.createElement("canvas");
        off.width = img.naturalWidth;
        off.height = img.naturalHeight;
        off.getContext("2d")!.drawImage(img, 0, 0);
        const data = off.getContext("2d")!.getImageData(0, 0, off.width, off.height);
        this.cpuTex = { width: data.width, height: data.height, data: data.data };
      }
      this.fading = performance.now();
      this.syncHash();
      this.draw();
    } catch {
      this.showError(`Image ${pano.file} failed to load.`);
      const retry = document.createElement("button");
      retry.textContent = "retry";
      retry.addEventListener("click", () => {
        this.banner.hidden = true;
        retry.remove();
        void this.showCurrent();
      });
      this.banner.append(" ", retry);
    }
  }

  private syncHash(): void {
    history.replaceState(null, "", encodeHash(this.state));
  }

  private draw(): void {
    const w = (this.canvas.width = this.canvas.clientWidth || 960);
    const h = (this.canvas.height = this.canvas.clientHeight || 540);
    if (this.gl) {
      this.gl.draw(this.state.view);
    } else if (this.ctx2d) {
      const tex = this.cpuTex;
      if (tex) {
        // Render at reduced resolution, then scale: the CPU path is a fallback.
        const rw = Math.min(w, 640);
        const rh = Math.round((rw * h) / w);
        const rgba = renderPerspective(tex, this.state.view, rw, rh);
        const off = document.createElement("canvas");
        off.width = rw;
        off.height = rh;
        off.getContext("2d")!.putImageData(new ImageData(new Uint8ClampedArray(rgba), rw, rh), 0, 0);
        this.ctx2d.imageSmoothingEnabled = true;
        this.ctx2d.drawImage(off, 0, 0, w, h);
      }
    }
    const age = performance.now() - this.fading;
    if (age < 250) {
      this.canvas.style.opacity = String(0.4 + (0.6 * age) / 250);
      requestAnimationFrame(() => this.draw());
    } else {
      this.canvas.style.opacity = "1";
    }
    this.drawHotspots(w / h);
  }

  private drawHotspots(aspect: number): void {
    this.overlay.replaceChildren();
    for (const { hotspot, screen } of visibleHotspots(this.state, aspect)) {
      const el = document.createElement("button");
      el.className = hotspot.target_panorama_id ? "hotspot" : "hotspot disabled";
      el.style.left = `${(screen.x * 100).toFixed(2)}%`;
      el.style.top = `${(screen.y * 100).toFixed(2)}%`;
      el.textContent = `${hotspot.tag_number}`;
      el.title = `tag ${hotspot.tag_number} · confidence ${hotspot.confidence.toFixed(2)}`;
      if (hotspot.target_panorama_id) {
        el.addEventListener("click", () => this.go(hotspot));
      } else {
        el.disabled = true;
      }
      this.overlay.append(el);
    }
  }

  private go(hotspot: TourHotspot): void {
    const prev = this.state;
    this.state = navigate(this.state, hotspot);
    if (this.state !== prev) void this.showCurrent();
  }
}

const root = document.getElementById("viewer");
if (root) {
  const params = new URLSearchParams(location.search);
  const app = new ViewerApp(root);
  void app.load(params.get("tour") ?? "tour.json");
}

export { ViewerApp };
