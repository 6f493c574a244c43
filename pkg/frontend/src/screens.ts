import { diagnose, errorMessage } from './api.js';
import { recordingSupported, startRecording, type ActiveRecording } from './recorder.js';
import type { Store, WizardState } from './store.js';
import type { OptionItem } from './types.js';

function heading(root: HTMLElement, text: string) {
  const h = document.createElement('h2');
  h.textContent = text;
  root.appendChild(h);
}

function choiceGrid(
  root: HTMLElement,
  items: OptionItem[],
  selected: string,
  onPick: (value: string) => void,
) {
  const grid = document.createElement('div');
  grid.className = 'choices';
  for (const opt of items) {
    const btn = document.createElement('button');
    btn.className = 'choice';
    btn.dataset.value = opt.value;
    btn.textContent = opt.label;
    if (opt.value === selected) btn.classList.add('selected');
    btn.addEventListener('click', () => onPick(opt.value));
    grid.appendChild(btn);
  }
  root.appendChild(grid);
}

export function renderLocation(root: HTMLElement, store: Store<WizardState>) {
  const s = store.get();
  heading(root, 'Where is the sound coming from?');
  if (!s.options) {
    const p = document.createElement('p');
    p.className = 'loading';
    p.textContent = 'Loading choices…';
    root.appendChild(p);
    return;
  }
  choiceGrid(root, s.options.locations, s.where, (value) => {
    store.set({ where: value, step: 1 });
  });
}

export function renderTiming(root: HTMLElement, store: Store<WizardState>) {
  const s = store.get();
  heading(root, 'When does it happen?');
  if (!s.options) return;
  choiceGrid(root, s.options.timings, s.when, (value) => {
    store.set({ when: value, step: 2 });
  });
}

let activeRecording: ActiveRecording | null = null;

export function renderCapture(root: HTMLElement, store: Store<WizardState>) {
  const s = store.get();
  heading(root, 'Let us hear it');

  const hint = document.createElement('p');
  hint.className = 'hint';
  hint.textContent =
    'Upload a WAV recording of the noise. A few seconds is plenty; 30 seconds is the limit.';
  root.appendChild(hint);

  const controls = document.createElement('div');
  controls.className = 'capture-controls';

  const pickLabel = document.createElement('label');
  pickLabel.className = 'file-pick';
  pickLabel.textContent = 'Choose a file';
  const input = document.createElement('input');
  input.type = 'file';
  input.accept = '.wav,audio/wav,audio/x-wav';
  input.addEventListener('change', () => {
    const f = input.files?.[0];
    if (f) store.set({ file: f, fileLabel: f.name, error: '' });
  });
  pickLabel.appendChild(input);
  controls.appendChild(pickLabel);

  if (recordingSupported()) {
    const rec = document.createElement('button');
    rec.className = 'record';
    rec.textContent = activeRecording ? 'Stop recording' : 'Record the noise';
    rec.addEventListener('click', async () => {
      try {
        if (activeRecording) {
          const blob = await activeRecording.stop();
          activeRecording = null;
          store.set({ file: blob, fileLabel: 'microphone recording', error: '' });
        } else {
          activeRecording = await startRecording();
          store.set({ error: '' }); // re-render flips the button label
        }
      } catch {
        activeRecording = null;
        store.set({ error: 'Could not access the microphone. Upload a file instead.' });
      }
    });
    controls.appendChild(rec);
  }
  root.appendChild(controls);

  const picked = document.createElement('p');
  picked.className = 'picked';
  picked.textContent = s.fileLabel ? `Selected: ${s.fileLabel}` : 'No recording selected yet.';
  root.appendChild(picked);

  const go = document.createElement('button');
  go.className = 'diagnose';
  go.textContent = s.busy ? 'Listening…' : 'Diagnose';
  go.disabled = !s.file || s.busy;
  go.addEventListener('click', async () => {
    const { file, where, when } = store.get();
    if (!file) return;
    store.set({ busy: true, error: '' });
    try {
      const result = await diagnose(file, where, when);
      store.set({ result, busy: false, step: 3 });
    } catch (err) {
      store.set({ error: errorMessage(err), busy: false });
    }
  });
  root.appendChild(go);
}

export function renderResults(root: HTMLElement, store: Store<WizardState>) {
  const s = store.get();
  heading(root, 'Closest known problems');
  const result = s.result;
  if (!result) {
    const p = document.createElement('p');
    p.textContent = 'No diagnosis yet. Go back and upload a recording.';
    root.appendChild(p);
    return;
  }

  if (result.fallback) {
    const note = document.createElement('p');
    note.className = 'fallback-note';
    note.textContent =
      'No reference recordings matched your location and timing, so these results come from the whole library.';
    root.appendChild(note);
  }

  const list = document.createElement('ol');
  list.className = 'matches';
  for (const m of result.matches) {
    const li = document.createElement('li');
    li.className = 'match';

    const head = document.createElement('div');
    head.className = 'match-head';
    const name = document.createElement('strong');
    name.textContent = m.diagnosis;
    const sim = document.createElement('span');
    sim.className = 'sim';
    sim.textContent = `similarity ${m.similarity.toFixed(3)}`;
    head.appendChild(name);
    head.appendChild(sim);
    li.appendChild(head);

    const pct = Math.round(m.confidence * 100);
    const bar = document.createElement('div');
    bar.className = 'bar';
    const fill = document.createElement('div');
    fill.className = 'bar-fill';
    fill.style.width = `${pct}%`;
    bar.appendChild(fill);
    li.appendChild(bar);
    const conf = document.createElement('span');
    conf.className = 'conf';
    conf.textContent = `${pct}% confident`;
    li.appendChild(conf);

    const audio = document.createElement('audio');
    audio.controls = true;
    audio.preload = 'none';
    audio.src = m.reference_audio_url;
    li.appendChild(audio);

    const links = document.createElement('div');
    links.className = 'links';
    const ref = document.createElement('a');
    ref.className = 'ref-link';
    ref.href = m.reference_audio_url;
    ref.textContent = 'reference clip';
    const search = document.createElement('a');
    search.className = 'search-link';
    search.href = m.search_url;
    search.target = '_blank';
    search.rel = 'noopener';
    search.textContent = 'read about this problem';
    links.appendChild(ref);
    links.appendChild(search);
    li.appendChild(links);

    list.appendChild(li);
  }
  root.appendChild(list);

  const meta = document.createElement('p');
  meta.className = 'meta';
  meta.textContent = `Ranked in ${result.query_duration_ms.toFixed(0)} ms.`;
  root.appendChild(meta);

  const again = document.createElement('button');
  again.className = 'restart';
  again.textContent = 'Start over';
  again.addEventListener('click', () => {
    store.set({
      step: 0,
      where: 'not_sure',
      when: 'not_sure',
      file: null,
      fileLabel: '',
      error: '',
      result: null,
    });
  });
  root.appendChild(again);
}
