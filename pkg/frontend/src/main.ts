import { errorMessage, fetchOptions } from './api.js';
import { createStore, initialState, type Store, type WizardState } from './store.js';
import { renderWizard } from './wizard.js';

export async function boot(root: HTMLElement): Promise<Store<WizardState>> {
  const store = createStore(initialState());
  root.innerHTML = '';
  renderWizard(root, store);
  try {
    const options = await fetchOptions();
    store.set({ options });
  } catch (err) {
    store.set({ error: errorMessage(err) });
  }
  return store;
}

const mount = document.getElementById('app');
if (mount) void boot(mount);
