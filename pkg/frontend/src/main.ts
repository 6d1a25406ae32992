// Browser entry point: wire the socket, view model, renderer and inputs.

import { SocketLike, TeleopClient } from './client.js';
import { KeyboardAxes, JoystickAxes, combineAxes } from './input.js';
import { render, robotColor } from './render.js';
import { applyScenario, applyState, createViewModel } from './viewmodel.js';

const params = new URLSearchParams(window.location.search);
const url = params.get('server') ?? `ws://${window.location.hostname || 'localhost'}:8710/ws`;

const canvas = document.getElementById('view') as HTMLCanvasElement;
const status = document.getElementById('status') as HTMLElement;
const robotSelect = document.getElementById('robot') as HTMLSelectElement;
const takeBtn = document.getElementById('takeover') as HTMLButtonElement;
const releaseBtn = document.getElementById('release') as HTMLButtonElement;
const pauseBtn = document.getElementById('pause') as HTMLButtonElement;
const resumeBtn = document.getElementById('resume') as HTMLButtonElement;
const stepBtn = document.getElementById('step') as HTMLButtonElement;

function browserSocketFactory(u: string): SocketLike {
  const ws = new WebSocket(u);
  const like: SocketLike = {
    send: (data) => ws.send(data),
    close: () => ws.close(),
    onopen: null,
    onmessage: null,
    onclose: null,
    onerror: null,
  };
  ws.onopen = () => like.onopen?.();
  ws.onmessage = (ev) => like.onmessage?.({ data: ev.data });
  ws.onclose = () => like.onclose?.();
  ws.onerror = () => like.onerror?.();
  return like;
}

const view = createViewModel();
const client = new TeleopClient(url, browserSocketFactory);
const keyboard = new KeyboardAxes();
const joystick = new JoystickAxes();
keyboard.attach(window);
joystick.attach(
  document.getElementById('pad') as HTMLElement,
  document.getElementById('knob') as HTMLElement,
);
const axes = combineAxes(keyboard, joystick);

client.onState.push((frame) => {
  applyState(view, frame, performance.now());
});
client.onError.push((frame) => {
  view.lastError = frame.msg;
  setTimeout(() => {
    view.lastError = '';
  }, 4000);
});
client.onDisconnect.push(() => {
  view.connected = false;
  status.textContent = 'disconnected';
});

takeBtn.onclick = () => {
  const robot = Number(robotSelect.value);
  view.selected = robot;
  client.takeover(robot);
  client.startInputLoop(robot, axes);
};
releaseBtn.onclick = () => {
  const robot = Number(robotSelect.value);
  client.release(robot);
};
pauseBtn.onclick = () => client.control('pause');
resumeBtn.onclick = () => client.control('resume');
stepBtn.onclick = () => client.control('step');

client
  .connect()
  .then((scenario) => {
    view.connected = true;
    applyScenario(view, scenario);
    status.textContent = `connected: ${scenario.name}`;
    robotSelect.innerHTML = '';
    for (const robot of scenario.robots) {
      const opt = document.createElement('option');
      opt.value = String(robot.id);
      opt.textContent = `robot ${robot.id} (${robot.mode})`;
      opt.style.color = robotColor(robot.id);
      robotSelect.appendChild(opt);
    }
  })
  .catch((err) => {
    status.textContent = `connection failed: ${err}`;
  });

function frame(): void {
  render(view, canvas);
  requestAnimationFrame(frame);
}
requestAnimationFrame(frame);
