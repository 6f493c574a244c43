import { renderCapture, renderLocation, renderResults, renderTiming } from './screens.js';
import type { Store, WizardState } from './store.js';

const steps = [
  { title: 'Location', render: renderLocation },
  { title: 'Timing', render: renderTiming },
  { title: 'Recording', render: renderCapture },
  { title: 'Results', render: renderResults },
];

export function renderWizard(root: HTMLElement, store: Store<WizardState>) {
  const nav = document.createElement('nav');
  nav.className = 'wizard-nav';
  const banner = document.createElement('div');
  banner.className = 'banner';
  banner.setAttribute('role', 'alert');
  banner.hidden = true;
  const content = document.createElement('section');
  content.className = 'wizard-content';
  root.appendChild(nav);
  root.appendChild(banner);
  root.appendChild(content);

  function sync() {
    const s = store.get();
    nav.innerHTML = '';
    steps.forEach((step, idx) => {
      const dot = document.createElement('button');
      dot.className = 'step-dot';
      dot.textContent = `${idx + 1}. ${step.title}`;
      if (idx === s.step) dot.classList.add('active');
      // back-navigation only; forward happens by finishing a step
      dot.disabled = idx > s.step || s.busy;
      dot.addEventListener('click', () => store.set({ step: idx, error: '' }));
      nav.appendChild(dot);
    });

    if (s.error) {
      banner.textContent = s.error;
      banner.hidden = false;
    } else {
      banner.hidden = true;
    }

    content.innerHTML = '';
    steps[s.step].render(content, store);
  }

  sync();
  store.subscribe(sync);
}
