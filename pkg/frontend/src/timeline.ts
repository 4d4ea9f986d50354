// Playback over cumulative monthly frames. The timeline owns only the
// frame cursor and the tick interval; whoever listens applies the frame's
// window to the view.

import type { TimeFrame } from "./api.js";

export const FRAME_MS = 700;

export type FrameListener = (frame: TimeFrame, index: number) => void;

export class Timeline {
  private frames: TimeFrame[] = [];
  private index = 0;
  private timer: ReturnType<typeof setInterval> | null = null;
  private listener: FrameListener | null = null;
  private playListener: ((playing: boolean) => void) | null = null;

  onFrame(listener: FrameListener): void {
    this.listener = listener;
  }

  /** Called whenever playback starts or stops, including the auto-pause at the last frame. */
  onPlayChange(listener: (playing: boolean) => void): void {
    this.playListener = listener;
  }

  setFrames(frames: TimeFrame[]): void {
    this.pause();
    this.frames = frames;
    this.index = 0;
  }

  /** Rewind to the first frame without emitting or starting playback. */
  reset(): void {
    this.pause();
    this.index = 0;
  }

  get frameCount(): number {
    return this.frames.length;
  }

  get currentIndex(): number {
    return this.index;
  }

  get isPlaying(): boolean {
    return this.timer !== null;
  }

  current(): TimeFrame | null {
    return this.frames[this.index] ?? null;
  }

  /** Jump to a frame without touching playback. */
  seek(index: number): void {
    if (this.frames.length === 0) return;
    this.index = Math.min(this.frames.length - 1, Math.max(0, index));
    this.emit();
  }

  /** Advance one frame; at the end of the strip this pauses instead. */
  step(): void {
    if (this.frames.length === 0) return;
    if (this.index >= this.frames.length - 1) {
      this.pause();
      return;
    }
    this.index += 1;
    this.emit();
  }

  // Play emits the current frame immediately, then advances on a fixed
  // cadence. Pausing keeps the cursor, so play-after-pause resumes where
  // it stopped.
  play(): void {
    if (this.timer !== null || this.frames.length === 0) return;
    if (this.index >= this.frames.length - 1) this.index = 0;
    this.emit();
    this.timer = setInterval(() => this.step(), FRAME_MS);
    this.playListener?.(true);
  }

  pause(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
      this.playListener?.(false);
    }
  }

  private emit(): void {
    const frame = this.current();
    if (frame && this.listener) this.listener(frame, this.index);
  }
}
