/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const bellows_curve: (a: number, b: number, c: number) => [number, number];
export const bipyramid_sample: (a: number) => [number, number];
export const catalog: () => [number, number];
export const flex_sample: (a: number, b: number, c: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
