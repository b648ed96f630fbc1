/** Wire types for the classification service. */

export interface ChunkResult {
  chunk_id: string;
  key_stage: string;
  confidence: number;
  probabilities: number[];
  text: string;
  span: [number, number];
  linguistics_only: boolean;
}

export interface ReadingAge {
  stage: string;
  age_low: number;
  age_high: number;
  text: string;
}

export type CurriculumCounts = Record<string, Record<string, number>>;

export interface AnalysisReport {
  report_version: string;
  overall_score: number;
  distribution: Record<string, number>;
  reading_age: ReadingAge;
  difficulty_series: [number, number][];
  top_vocabulary: [string, number][];
  vocabulary_mode: "attention" | "fallback";
  curriculum: CurriculumCounts;
  most_complex: ChunkResult | null;
  least_complex: ChunkResult | null;
}

export interface ClassifyResponse {
  engine_version: string;
  feature_schema_version: number;
  report: AnalysisReport;
  chunks: ChunkResult[];
  timing_ms?: number;
}

export interface ClassifyRequest {
  text: string;
  token_budget?: number;
  linguistics_only?: boolean;
}

export interface DemoText {
  id: string;
  text: string;
}

/** JSON-Schema document served at /schema; only the parts the client reads. */
export interface SchemaDocument {
  properties: {
    report_version?: { const?: string };
    distribution?: { required?: string[] };
    [key: string]: unknown;
  };
  [key: string]: unknown;
}
