import { afterEach, describe, expect, it, vi } from "vitest";

import { ApiError, RequestGate, SearchClient, debounce } from "../src/api.js";

afterEach(() => {
  vi.restoreAllMocks();
  vi.useRealTimers();
});

describe("SearchClient", () => {
  it("posts the query with include_breakdown on", async () => {
    const fetchMock = vi.fn(async () =>
      new Response(JSON.stringify({ results: [] }), { status: 200 }),
    );
    vi.stubGlobal("fetch", fetchMock);
    const client = new SearchClient("http://svc");
    await client.search({ query: "q", beta: 1.0 });
    const [url, init] = fetchMock.mock.calls[0] as unknown as [string, RequestInit];
    expect(url).toBe("http://svc/api/search");
    const body = JSON.parse(init.body as string);
    expect(body.include_breakdown).toBe(true);
    expect(body.beta).toBe(1.0);
  });

  it("wraps non-2xx responses in ApiError with the service detail", async () => {
    vi.stubGlobal("fetch", vi.fn(async () =>
      new Response(JSON.stringify({ detail: "no index loaded" }), { status: 503 }),
    ));
    const client = new SearchClient();
    await expect(client.search({ query: "q" })).rejects.toThrowError(ApiError);
    await expect(client.search({ query: "q" })).rejects.toThrow(/no index loaded/);
  });

  it("builds local citation links in fixture mode and outbound ones otherwise", () => {
    const client = new SearchClient("http://svc");
    expect(client.citationUrl("10316077", "double"))
      .toBe("http://svc/api/kb/article/10316077");
    expect(client.citationUrl("10316077", "remote"))
      .toBe("https://www.ncbi.nlm.nih.gov/pmc/articles/PMC10316077/");
  });
});

describe("RequestGate", () => {
  it("supersedes earlier requests and aborts their signals", () => {
    const gate = new RequestGate();
    const first = gate.begin();
    const second = gate.begin();
    expect(first.signal.aborted).toBe(true);
    expect(second.signal.aborted).toBe(false);
    expect(gate.isCurrent(first.id)).toBe(false);
    expect(gate.isCurrent(second.id)).toBe(true);
  });
});

describe("debounce", () => {
  it("collapses a burst into the trailing call", () => {
    vi.useFakeTimers();
    const spy = vi.fn();
    const run = debounce(spy, 200);
    run(1);
    run(2);
    vi.advanceTimersByTime(150);
    run(3);
    vi.advanceTimersByTime(199);
    expect(spy).not.toHaveBeenCalled();
    vi.advanceTimersByTime(1);
    expect(spy).toHaveBeenCalledTimes(1);
    expect(spy).toHaveBeenCalledWith(3);
  });
});
