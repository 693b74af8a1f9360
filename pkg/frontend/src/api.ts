/**
 * Thin client for the registry HTTP/JSON API. Every piece of data the panel
 * shows comes through this class; it never talks to any other endpoint.
 */

import type { AasShell, AasSubmodel, ProductSpecView } from "./model.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly errorName: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

interface ShellEntry {
  id: string;
  endpoint: string | null;
  registeredAt: number;
}

export class RegistryApi {
  /** Base URL of the registry facade, e.g. "http://127.0.0.1:43215". */
  constructor(
    public readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request(method: string, path: string, body?: unknown): Promise<unknown> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "Content-Type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchFn(this.baseUrl + path, init);
    const text = await response.text();
    const doc = text ? JSON.parse(text) : null;
    if (!response.ok) {
      const err = doc as { error?: string; message?: string } | null;
      throw new ApiError(response.status, err?.error ?? "HttpError", err?.message ?? text);
    }
    return doc;
  }

  async listShells(): Promise<ShellEntry[]> {
    const doc = (await this.request("GET", "/shells")) as { shells: ShellEntry[] };
    return doc.shells;
  }

  getShell(shellId: string): Promise<AasShell> {
    return this.request("GET", `/shells/${shellId}`) as Promise<AasShell>;
  }

  getSubmodel(shellId: string, submodelId: string): Promise<AasSubmodel> {
    return this.request(
      "GET",
      `/shells/${shellId}/submodels/${submodelId}`,
    ) as Promise<AasSubmodel>;
  }

  async invoke(
    shellId: string,
    submodelId: string,
    operation: string,
    args: Record<string, unknown>,
  ): Promise<unknown> {
    const doc = (await this.request(
      "POST",
      `/shells/${shellId}/submodels/${submodelId}/operations/${operation}/invoke`,
      { args },
    )) as { result: unknown };
    return doc.result;
  }

  /** Read the three specified properties from the product shell. */
  async getProductSpec(productId: string): Promise<ProductSpecView> {
    const submodel = await this.getSubmodel(`car-${productId}`, "ProductSpec");
    const values: Record<string, unknown> = {};
    for (const element of submodel.elements) {
      if (element.kind === "Property") {
        values[element.idShort] = element.value;
      }
    }
    return {
      productId,
      wheelColor: String(values.wheelColor ?? ""),
      engraving: Boolean(values.engraving),
      windows: Number(values.windows ?? 0),
    };
  }
}
