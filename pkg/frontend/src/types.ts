export interface OptionItem {
  value: string;
  label: string;
}

export interface OptionsResponse {
  locations: OptionItem[];
  timings: OptionItem[];
}

export interface Match {
  record_id: string;
  diagnosis: string;
  similarity: number;
  confidence: number;
  search_url: string;
  reference_audio_url: string;
  rank: number;
}

export interface DiagnoseResponse {
  matches: Match[];
  fallback: boolean;
  query_duration_ms: number;
  embedder_id: string;
}
