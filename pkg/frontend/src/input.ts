// Keyboard and on-screen joystick input sources, normalized to [-1, 1].

import { Axes } from './client.js';

export class KeyboardAxes {
  private pressed = new Set<string>();

  attach(target: EventTarget): void {
    target.addEventListener('keydown', (ev) => {
      this.pressed.add((ev as KeyboardEvent).key);
    });
    target.addEventListener('keyup', (ev) => {
      this.pressed.delete((ev as KeyboardEvent).key);
    });
  }

  read(): Axes {
    let forward = 0;
    let turn = 0;
    if (this.pressed.has('ArrowUp')) forward += 1;
    if (this.pressed.has('ArrowDown')) forward -= 1;
    if (this.pressed.has('ArrowLeft')) turn += 1; // counterclockwise
    if (this.pressed.has('ArrowRight')) turn -= 1;
    return { forward, turn };
  }
}

export class JoystickAxes {
  private value: Axes = { forward: 0, turn: 0 };

  attach(pad: HTMLElement, knob: HTMLElement): void {
    const update = (ev: PointerEvent) => {
      const rect = pad.getBoundingClientRect();
      const cx = rect.left + rect.width / 2;
      const cy = rect.top + rect.height / 2;
      const dx = (ev.clientX - cx) / (rect.width / 2);
      const dy = (ev.clientY - cy) / (rect.height / 2);
      const turn = Math.max(-1, Math.min(1, -dx));
      const forward = Math.max(-1, Math.min(1, -dy));
      this.value = { forward, turn };
      knob.style.transform = `translate(${-turn * 40}px, ${-forward * 40}px)`;
    };
    const reset = () => {
      this.value = { forward: 0, turn: 0 };
      knob.style.transform = 'translate(0px, 0px)';
    };
    let active = false;
    pad.addEventListener('pointerdown', (ev) => {
      active = true;
      pad.setPointerCapture(ev.pointerId);
      update(ev);
    });
    pad.addEventListener('pointermove', (ev) => {
      if (active) update(ev);
    });
    pad.addEventListener('pointerup', () => {
      active = false;
      reset();
    });
    pad.addEventListener('pointercancel', () => {
      active = false;
      reset();
    });
  }

  read(): Axes {
    return this.value;
  }
}

export function combineAxes(...sources: { read(): Axes }[]): () => Axes {
  return () => {
    let forward = 0;
    let turn = 0;
    for (const src of sources) {
      const a = src.read();
      forward += a.forward;
      turn += a.turn;
    }
    return {
      forward: Math.max(-1, Math.min(1, forward)),
      turn: Math.max(-1, Math.min(1, turn)),
    };
  };
}
