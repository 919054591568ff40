/* tslint:disable */
/* eslint-disable */

/**
 * Profile `n‖Tⁿ − Tⁿ⁻¹‖_p` together with the resolvent and spectral diagnostics.
 */
export function analyticity(matrix: string, p: number, n_max: number): string;

/**
 * Numerical range of `T` against the Stolz region of half-angle `gamma`.
 */
export function numerical_range(matrix: string, gamma: number): string;

/**
 * Strong q-variation of a sequence (one `re` or `re,im` per line): total, prefix norms
 * and the dyadic square-function value.
 */
export function variation(sequence: string, q: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly analyticity: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly numerical_range: (a: number, b: number, c: number) => [number, number, number, number];
    readonly variation: (a: number, b: number, c: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
