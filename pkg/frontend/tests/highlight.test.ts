import { describe, expect, it } from "vitest";

import { highlightPddl } from "../src/highlight.js";

describe("highlightPddl", () => {
  it("wraps keywords, variables, and comments", () => {
    const out = highlightPddl("(:action load ?p) ; note");
    expect(out).toContain('<span class="tok-keyword">:action</span>');
    expect(out).toContain('<span class="tok-var">?p</span>');
    expect(out).toContain('<span class="tok-comment">; note</span>');
  });
  it("escapes HTML first", () => {
    expect(highlightPddl("<script>")).not.toContain("<script>");
  });
});
