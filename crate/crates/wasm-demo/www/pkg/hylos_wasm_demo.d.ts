/* tslint:disable */
/* eslint-disable */

/**
 * Radial ground-state table with its first integrals.
 */
export class Profile {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    charge(): number;
    e0(): number;
    energy(): number;
    lambda(): number;
    r(): Float64Array;
    u(): Float64Array;
    u0(): number;
}

/**
 * A 1D soliton boosted to speed `v` (Galilean for NS, Lorentz for NKG),
 * advanced in chunks so the page can draw a space-time picture.
 */
export class Soliton {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Advances by `steps` time steps.
     */
    advance(steps: number): void;
    amplitude(): Float64Array;
    /**
     * [E, H, Λ] at the current time.
     */
    integrals(): Float64Array;
    constructor(eq: string, v: number, length: number, nodes: number);
    real_part(): Float64Array;
    time(): number;
}

export function ground_state(eq: string, a: number, p: number, omega: number, dim: number): Profile;

/**
 * Λ of ε·u_R for every (ε, R) pair, row-major in R. NKG states oscillate at
 * the rest frequency √a. The last entry is the threshold E₀.
 */
export function threshold_scan(eq: string, a: number, eps: Float64Array, radii: Float64Array): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_profile_free: (a: number, b: number) => void;
    readonly __wbg_soliton_free: (a: number, b: number) => void;
    readonly ground_state: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
    readonly profile_charge: (a: number) => number;
    readonly profile_e0: (a: number) => number;
    readonly profile_energy: (a: number) => number;
    readonly profile_lambda: (a: number) => number;
    readonly profile_r: (a: number) => [number, number];
    readonly profile_u: (a: number) => [number, number];
    readonly profile_u0: (a: number) => number;
    readonly soliton_advance: (a: number, b: number) => [number, number];
    readonly soliton_amplitude: (a: number) => [number, number];
    readonly soliton_integrals: (a: number) => [number, number, number, number];
    readonly soliton_new: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly soliton_real_part: (a: number) => [number, number];
    readonly soliton_time: (a: number) => number;
    readonly threshold_scan: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
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
