import { describe, expect, it } from "vitest";
import { defaultKeymap, keyToFeedback, MAX_EVENTS_PER_SECOND,
         RateLimiter } from "./keymap.js";

describe("defaultKeymap", () => {
  it("binds exactly two keys per announced channel", () => {
    for (const dim of [1, 2, 3, 4]) {
      const map = defaultKeymap(dim);
      expect(map.size).toBe(2 * dim);
      for (let ch = 0; ch < dim; ch++) {
        const signs = [...map.values()]
          .filter((b) => b.channel === ch)
          .map((b) => b.sign)
          .sort();
        expect(signs).toEqual([-1, 1]);
      }
    }
  });

  it("binds nothing outside the announced channels", () => {
    const map = defaultKeymap(1);
    for (const b of map.values()) {
      expect(b.channel).toBe(0);
    }
  });

  it("rejects dimensions it has no bindings for", () => {
    expect(() => defaultKeymap(0)).toThrow();
    expect(() => defaultKeymap(5)).toThrow();
  });
});

describe("RateLimiter", () => {
  it("caps a held key to the advertised rate", () => {
    const limiter = new RateLimiter();
    let sent = 0;
    // keyboard auto-repeat: one keydown every 25ms for one second
    for (let t = 0; t < 1000; t += 25) {
      if (limiter.allow(0, t)) sent += 1;
    }
    expect(sent).toBeLessThanOrEqual(MAX_EVENTS_PER_SECOND);
    expect(sent).toBeGreaterThanOrEqual(MAX_EVENTS_PER_SECOND - 1);
  });

  it("tracks channels independently", () => {
    const limiter = new RateLimiter();
    expect(limiter.allow(0, 0)).toBe(true);
    expect(limiter.allow(1, 1)).toBe(true);
    expect(limiter.allow(0, 2)).toBe(false);
    expect(limiter.allow(1, 3)).toBe(false);
    expect(limiter.allow(0, 150)).toBe(true);
  });

  it("rejects nonsensical rates", () => {
    expect(() => new RateLimiter(0)).toThrow();
    expect(() => new RateLimiter(-3)).toThrow();
  });
});

describe("keyToFeedback", () => {
  it("maps a bound key to a single-channel message", () => {
    const map = defaultKeymap(2);
    const limiter = new RateLimiter();
    const entry = [...map.entries()].find(([, b]) => b.channel === 1 &&
                                                     b.sign === 1);
    expect(entry).toBeDefined();
    const msg = keyToFeedback(entry![0], map, limiter, 0, "sess", 2);
    expect(msg).not.toBeNull();
    expect(msg!.session).toBe("sess");
    expect(msg!.h).toHaveLength(2);
    expect(msg!.h[1]).toBe(1);
    expect(msg!.h[0]).toBe(0);
  });

  it("ignores unbound keys", () => {
    const map = defaultKeymap(1);
    const limiter = new RateLimiter();
    expect(keyToFeedback("q", map, limiter, 0, "sess", 1)).toBeNull();
    expect(keyToFeedback("Enter", map, limiter, 0, "sess", 1)).toBeNull();
  });

  it("drops events past the rate limit but keeps other channels live", () => {
    const map = defaultKeymap(2);
    const limiter = new RateLimiter();
    const plus0 = [...map.entries()].find(([, b]) => b.channel === 0 &&
                                                     b.sign === 1)![0];
    const plus1 = [...map.entries()].find(([, b]) => b.channel === 1 &&
                                                     b.sign === 1)![0];
    expect(keyToFeedback(plus0, map, limiter, 0, "s", 2)).not.toBeNull();
    expect(keyToFeedback(plus0, map, limiter, 10, "s", 2)).toBeNull();
    expect(keyToFeedback(plus1, map, limiter, 11, "s", 2)).not.toBeNull();
    expect(keyToFeedback(plus0, map, limiter, 200, "s", 2)).not.toBeNull();
  });

  it("shares one budget between both directions of a channel", () => {
    const map = defaultKeymap(1);
    const limiter = new RateLimiter();
    const plus = [...map.entries()].find(([, b]) => b.sign === 1)![0];
    const minus = [...map.entries()].find(([, b]) => b.sign === -1)![0];
    expect(keyToFeedback(plus, map, limiter, 0, "s", 1)).not.toBeNull();
    expect(keyToFeedback(minus, map, limiter, 20, "s", 1)).toBeNull();
  });
});
