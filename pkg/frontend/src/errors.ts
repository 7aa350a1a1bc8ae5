/** Error codes crossing the engine boundary, mapped onto one exception type. */
export type ErrorCode =
  | "ERR_FORMAT"
  | "ERR_VERSION"
  | "ERR_CHECKSUM"
  | "ERR_SCHEMA"
  | "ERR_CONFIG"
  | "ERR_RELEASED"
  | "ERR_CLI";

export class CtrBoostError extends Error {
  readonly code: ErrorCode;

  constructor(code: ErrorCode, message: string) {
    super(message);
    this.name = "CtrBoostError";
    this.code = code;
  }
}
