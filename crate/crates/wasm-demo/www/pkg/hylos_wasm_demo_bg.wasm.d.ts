/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_profile_free: (a: number, b: number) => void;
export const __wbg_soliton_free: (a: number, b: number) => void;
export const ground_state: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
export const profile_charge: (a: number) => number;
export const profile_e0: (a: number) => number;
export const profile_energy: (a: number) => number;
export const profile_lambda: (a: number) => number;
export const profile_r: (a: number) => [number, number];
export const profile_u: (a: number) => [number, number];
export const profile_u0: (a: number) => number;
export const soliton_advance: (a: number, b: number) => [number, number];
export const soliton_amplitude: (a: number) => [number, number];
export const soliton_integrals: (a: number) => [number, number, number, number];
export const soliton_new: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
export const soliton_real_part: (a: number) => [number, number];
export const soliton_time: (a: number) => number;
export const threshold_scan: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
