import type { DiagnoseResponse, OptionsResponse } from './types.js';

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = 'ApiError';
  }
}

async function throwApiError(res: Response): Promise<never> {
  let code = 'UNKNOWN';
  let message = `request failed (${res.status})`;
  try {
    const body = await res.json();
    if (typeof body?.code === 'string') code = body.code;
    if (typeof body?.message === 'string') message = body.message;
  } catch {
    // non-JSON error body, keep the defaults
  }
  throw new ApiError(res.status, code, message);
}

export async function fetchOptions(): Promise<OptionsResponse> {
  const res = await fetch('/api/v1/options');
  if (!res.ok) await throwApiError(res);
  return res.json();
}

export async function diagnose(
  file: Blob,
  where: string,
  when: string,
): Promise<DiagnoseResponse> {
  const form = new FormData();
  const upload =
    file instanceof File
      ? file
      : new File([file], 'recording.wav', { type: file.type || 'audio/wav' });
  form.append('audio', upload);
  form.append('where', where);
  form.append('when', when);
  const res = await fetch('/api/v1/diagnose', { method: 'POST', body: form });
  if (!res.ok) await throwApiError(res);
  return res.json();
}

const FRIENDLY: Record<string, string> = {
  TOO_SHORT: 'That clip is too short. Give us at least a second of the noise.',
  TOO_LARGE: 'That file is too big. The limit is 25 MB.',
  TOO_LONG: 'That recording is too long. Trim it to 30 seconds or less.',
  UNSUPPORTED_FORMAT: 'That file type will not work. Upload a WAV recording.',
  SILENT_AUDIO: 'We could not hear anything in that clip. Get closer to the noise and try again.',
  EMPTY_AUDIO: 'That file is empty. Pick the recording again.',
  CORRUPT_STREAM: 'That file looks damaged. Re-export it and try again.',
  INVALID_ENUM: 'Pick the location and timing from the lists.',
  INDEX_NOT_LOADED: 'The service is down for maintenance. Try again in a few minutes.',
};

export function errorMessage(err: unknown): string {
  if (err instanceof ApiError) {
    return FRIENDLY[err.code] ?? err.message;
  }
  return 'Could not reach the service. Check your connection and try again.';
}
