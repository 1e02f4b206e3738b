/* tslint:disable */
/* eslint-disable */

export class PathView {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Drawdown-constrained wealth.
     */
    readonly constrained: Float64Array;
    /**
     * Constrained wealth over its running maximum.
     */
    readonly rel_dd: Float64Array;
    readonly times: Float64Array;
    /**
     * Unconstrained growth-optimal wealth.
     */
    readonly xhat: Float64Array;
}

export class ZetaView {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Cycle ratios, sorted ascending.
     */
    readonly samples: Float64Array;
    /**
     * Paths that ended before completing every requested cycle.
     */
    readonly truncated_paths: number;
}

export function explorePath(alpha: number, seed: number, n_steps: number, dt: number): PathView;

export function kellyCurve(alpha: number, n: number): Float64Array;

/**
 * Flat array: the fixed-floor values followed by the scale-law values.
 */
export function zetaCdfs(alpha: number, zs: Float64Array): Float64Array;

export function zetaSample(alpha: number, n_paths: number, seed: number): ZetaView;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_pathview_free: (a: number, b: number) => void;
    readonly __wbg_zetaview_free: (a: number, b: number) => void;
    readonly explorePath: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly kellyCurve: (a: number, b: number) => [number, number, number, number];
    readonly pathview_constrained: (a: number) => [number, number];
    readonly pathview_rel_dd: (a: number) => [number, number];
    readonly pathview_times: (a: number) => [number, number];
    readonly pathview_xhat: (a: number) => [number, number];
    readonly zetaCdfs: (a: number, b: number, c: number) => [number, number, number, number];
    readonly zetaSample: (a: number, b: number, c: number) => [number, number, number];
    readonly zetaview_samples: (a: number) => [number, number];
    readonly zetaview_truncated_paths: (a: number) => number;
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
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
