/**
 * PCG32 (XSH-RR): the same deterministic stream the Python package pins
 * down in its README, so dumps and corpora are reproducible per seed.
 */

const MASK64 = (1n << 64n) - 1n;
const MULT = 6364136223846793005n;

export class Pcg32 {
    private state: bigint;
    private readonly inc: bigint;

    constructor(seed: number | bigint, stream: number | bigint = 54n) {
        this.inc = (((BigInt(stream) & MASK64) << 1n) | 1n) & MASK64;
        this.state = 0n;
        this.step();
        this.state = (this.state + (BigInt(seed) & MASK64)) & MASK64;
        this.step();
    }

    private step(): void {
        this.state = (this.state * MULT + this.inc) & MASK64;
    }

    nextU32(): number {
        const old = this.state;
        this.step();
        const xorshifted = Number((((old >> 18n) ^ old) >> 27n) & 0xffffffffn);
        const rot = Number(old >> 59n);
        return ((xorshifted >>> rot) | (xorshifted << ((-rot) & 31))) >>> 0;
    }

    /** Uniform double in [0, 1). */
    nextF64(): number {
        return this.nextU32() * 2 ** -32;
    }

    /** Uniform integer in [0, n) without modulo bias. */
    bounded(n: number): number {
        if (n <= 0) throw new Error("bound must be positive");
        const threshold = (2 ** 32 - n) % n;
        for (;;) {
            const r = this.nextU32();
            if (r >= threshold) return r % n;
        }
    }

    /** In-place Fisher-Yates shuffle, descending index order. */
    shuffle<T>(items: T[]): T[] {
        for (let i = items.length - 1; i > 0; i--) {
            const j = this.bounded(i + 1);
            [items[i], items[j]] = [items[j], items[i]];
        }
        return items;
    }

    pick<T>(items: readonly T[]): T {
        return items[this.bounded(items.length)];
    }
}
