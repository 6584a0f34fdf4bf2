/** Equirectangular -> perspective resampling.
 *
 * Two interchangeable paths render a view: a WebGL fragment shader
 * (preferred) and a pure CPU sampler. The CPU sampler is also the
 * testable core: it depends only on typed arrays, not on the DOM.
 */

import { ViewPose } from "./state.js";

export interface EquirectTexture {
  width: number;
  height: number;
  /** RGBA, row-major, width * height * 4 bytes. */
  data: Uint8ClampedArray;
}

const DEG = Math.PI / 180;

/** Bilinear sample with horizontal wrap and vertical clamp; returns RGBA. */
export function sampleEquirect(tex: EquirectTexture, px: number, py: number, out: number[]): void {
  const { width, height, data } = tex;
  const fx = px - 0.5;
  const fy = py - 0.5;
  let x0 = Math.floor(fx);
  let y0 = Math.floor(fy);
  const tx = fx - x0;
  const ty = fy - y0;
  const x0w = ((x0 % width) + width) % width;
  const x1w = (x0w + 1) % width;
  const y0c = Math.min(Math.max(y0, 0), height - 1);
  const y1c = Math.min(Math.max(y0 + 1, 0), height - 1);
  for (let c = 0; c < 4; c++) {
    const p00 = data[(y0c * width + x0w) * 4 + c];
    const p10 = data[(y0c * width + x1w) * 4 + c];
    const p01 = data[(y1c * width + x0w) * 4 + c];
    const p11 = data[(y1c * width + x1w) * 4 + c];
    const top = p00 * (1 - tx) + p10 * tx;
    const bot = p01 * (1 - tx) + p11 * tx;
    out[c] = top * (1 - ty) + bot * ty;
  }
}

/** Render a pinhole view of the panorama into an RGBA buffer. */
export function renderPerspective(
  tex: EquirectTexture,
  view: ViewPose,
  outWidth: number,
  outHeight: number,
): Uint8ClampedArray {
  const out = new Uint8ClampedArray(outWidth * outHeight * 4);
  const tanHalf = Math.tan((view.fovDeg / 2) * DEG);
  const tanV = (tanHalf * outHeight) / outWidth;
  const cy = Math.cos(view.yawDeg * DEG);
  const sy = Math.sin(view.yawDeg * DEG);
  const cp = Math.cos(view.pitchDeg * DEG);
  const sp = Math.sin(view.pitchDeg * DEG);
  const rgba = [0, 0, 0, 255];
  for (let j = 0; j < outHeight; j++) {
    const v = 1 - (2 * (j + 0.5)) / outHeight;
    for (let i = 0; i < outWidth; i++) {
      const u = (2 * (i + 0.5)) / outWidth - 1;
      // camera-frame ray, then pitch about X, then yaw about Y
      const cx = u * tanHalf;
      const cyy = v * tanV;
      const cz = 1;
      const y1 = cp * cyy + sp * cz;
      const z1 = -sp * cyy + cp * cz;
      const wx = cy * cx + sy * z1;
      const wy = y1;
      const wz = -sy * cx + cy * z1;
      const norm = Math.sqrt(wx * wx + wy * wy + wz * wz);
      const lat = Math.asin(wy / norm);
      const lon = Math.atan2(wx, wz);
      let px = (lon / (2 * Math.PI) + 0.5) * tex.width;
      px = ((px % tex.width) + tex.width) % tex.width;
      const py = (0.5 - lat / Math.PI) * tex.height;
      sampleEquirect(tex, px, py, rgba);
      const o = (j * outWidth + i) * 4;
      out[o] = rgba[0];
      out[o + 1] = rgba[1];
      out[o + 2] = rgba[2];
      out[o + 3] = 255;
    }
  }
  return out;
}

// --- WebGL path ---------------------------------------------------------------

const VERT = `attribute vec2 a_pos;
varying vec2 v_ndc;
void main() {
  v_ndc = a_pos;
  gl_Position = vec4(a_pos, 0.0, 1.0);
}`;

const FRAG = `precision highp float;
varying vec2 v_ndc;
uniform sampler2D u_tex;
uniform float u_tanHalf;
uniform float u_tanV;
uniform float u_yaw;
uniform float u_pitch;
const float PI = 3.141592653589793;
void main() {
  vec3 cam = vec3(v_ndc.x * u_tanHalf, v_ndc.y * u_tanV, 1.0);
  float cp = cos(u_pitch), sp = sin(u_pitch);
  vec3 p = vec3(cam.x, cp * cam.y + sp * cam.z, -sp * cam.y + cp * cam.z);
  float cy = cos(u_yaw), sy = sin(u_yaw);
  vec3 w = vec3(cy * p.x + sy * p.z, p.y, -sy * p.x + cy * p.z);
  w = normalize(w);
  float lon = atan(w.x, w.z);
  float lat = asin(clamp(w.y, -1.0, 1.0));
  vec2 uv = vec2(lon / (2.0 * PI) + 0.5, 0.5 - lat / PI);
  gl_FragColor = texture2D(u_tex, uv);
}`;

export interface GlRenderer {
  setTexture(image: TexImageSource): void;
  draw(view: ViewPose): void;
}

/** WebGL-backed renderer, or null when a context is unavailable. */
export function createGlRenderer(canvas: HTMLCanvasElement): GlRenderer | null {
  const gl = (canvas.getContext("webgl") || canvas.getContext("experimental-webgl")) as WebGLRenderingContext | null;
  if (!gl) return null;

  const compile = (type: number, src: string) => {
    const shader = gl.createShader(type)!;
    gl.shaderSource(shader, src);
    gl.compileShader(shader);
    if (!gl.getShaderParameter(shader, gl.COMPILE_STATUS)) {
      throw new Error(`shader compile failed: ${gl.getShaderInfoLog(shader)}`);
    }
    return shader;
  };
  const program = gl.createProgram()!;
  gl.attachShader(program, compile(gl.VERTEX_SHADER, VERT));
  gl.attachShader(program, compile(gl.FRAGMENT_SHADER, FRAG));
  gl.linkProgram(program);
  if (!gl.getProgramParameter(program, gl.LINK_STATUS)) return null;
  gl.useProgram(program);

  const quad = gl.createBuffer();
  gl.bindBuffer(gl.ARRAY_BUFFER, quad);
  gl.bufferData(gl.ARRAY_BUFFER, new Float32Array([-1, -1, 1, -1, -1, 1, 1, 1]), gl.STATIC_DRAW);
  const aPos = gl.getAttribLocation(program, "a_pos");
  gl.enableVertexAttribArray(aPos);
  gl.vertexAttribPointer(aPos, 2, gl.FLOAT, false, 0, 0);

  const texture = gl.createTexture();
  gl.bindTexture(gl.TEXTURE_2D, texture);
  gl.texParameteri(gl.TEXTURE_2D, gl.TEXTURE_WRAP_S, gl.CLAMP_TO_EDGE);
  gl.texParameteri(gl.TEXTURE_2D, gl.TEXTURE_WRAP_T, gl.CLAMP_TO_EDGE);
  gl.texParameteri(gl.TEXTURE_2D, gl.TEXTURE_MIN_FILTER, gl.LINEAR);
  gl.texParameteri(gl.TEXTURE_2D, gl.TEXTURE_MAG_FILTER, gl.LINEAR);

  const uTanHalf = gl.getUniformLocation(program, "u_tanHalf");
  const uTanV = gl.getUniformLocation(program, "u_tanV");
  const uYaw = gl.getUniformLocation(program, "u_yaw");
  const uPitch = gl.getUniformLocation(program, "u_pitch");

  return {
    setTexture(image: TexImageSource) {
      gl.bindTexture(gl.TEXTURE_2D, texture);
      gl.texImage2D(gl.TEXTURE_2D, 0, gl.RGBA, gl.RGBA, gl.UNSIGNED_BYTE, image);
    },
    draw(view: ViewPose) {
      gl.viewport(0, 0, canvas.width, canvas.height);
      const tanHalf = Math.tan((view.fovDeg / 2) * DEG);
      gl.uniform1f(uTanHalf, tanHalf);
      gl.uniform1f(uTanV, (tanHalf * canvas.height) / canvas.width);
      gl.uniform1f(uYaw, view.yawDeg * DEG);
      gl.uniform1f(uPitch, view.pitchDeg * DEG);
      gl.drawArrays(gl.TRIANGLE_STRIP, 0, 4);
    },
  };
}
