// Reader for the solver's field dumps: uint32 ndim, uint32 dims[ndim], then
// float64 payload, all little-endian.

export interface FieldDump {
  dims: number[];
  data: Float64Array;
}

export function readFieldDump(buf: Buffer, label = "field dump"): FieldDump {
  if (buf.length < 4) throw new Error(`${label}: truncated header`);
  const ndim = buf.readUInt32LE(0);
  if (ndim < 1 || ndim > 8) throw new Error(`${label}: implausible rank ${ndim}`);
  const headerBytes = 4 + 4 * ndim;
  if (buf.length < headerBytes) throw new Error(`${label}: truncated header`);
  const dims: number[] = [];
  for (let i = 0; i < ndim; i++) dims.push(buf.readUInt32LE(4 + 4 * i));
  const count = dims.reduce((a, b) => a * b, 1);
  if (buf.length !== headerBytes + 8 * count) {
    throw new Error(
      `${label}: payload size ${buf.length - headerBytes} does not match dims [${dims.join(", ")}]`,
    );
  }
  const data = new Float64Array(count);
  for (let i = 0; i < count; i++) data[i] = buf.readDoubleLE(headerBytes + 8 * i);
  return { dims, data };
}

/** Row-major accessor for a rank-2 dump. */
export function at2(field: FieldDump, i: number, j: number): number {
  return field.data[i * field.dims[1] + j];
}
