import type { DiagnoseResponse, OptionsResponse } from './types.js';

type Listener = () => void;

export interface Store<T> {
  get(): T;
  set(patch: Partial<T>): void;
  subscribe(fn: Listener): () => void;
}

export function createStore<T extends object>(initial: T): Store<T> {
  let state = initial;
  const listeners = new Set<Listener>();
  return {
    get: () => state,
    set(patch) {
      state = { ...state, ...patch };
      listeners.forEach((fn) => fn());
    },
    subscribe(fn) {
      listeners.add(fn);
      return () => {
        listeners.delete(fn);
      };
    },
  };
}

export interface WizardState {
  step: number;
  options: OptionsResponse | null;
  where: string;
  when: string;
  file: Blob | null;
  fileLabel: string;
  busy: boolean;
  error: string;
  result: DiagnoseResponse | null;
}

export function initialState(): WizardState {
  return {
    step: 0,
    options: null,
    where: 'not_sure',
    when: 'not_sure',
    file: null,
    fileLabel: '',
    busy: false,
    error: '',
    result: null,
  };
}
