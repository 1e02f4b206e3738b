/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_pathview_free: (a: number, b: number) => void;
export const __wbg_zetaview_free: (a: number, b: number) => void;
export const explorePath: (a: number, b: number, c: number, d: number) => [number, number, number];
export const kellyCurve: (a: number, b: number) => [number, number, number, number];
export const pathview_constrained: (a: number) => [number, number];
export const pathview_rel_dd: (a: number) => [number, number];
export const pathview_times: (a: number) => [number, number];
export const pathview_xhat: (a: number) => [number, number];
export const zetaCdfs: (a: number, b: number, c: number) => [number, number, number, number];
export const zetaSample: (a: number, b: number, c: number) => [number, number, number];
export const zetaview_samples: (a: number) => [number, number];
export const zetaview_truncated_paths: (a: number) => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_start: () => void;
