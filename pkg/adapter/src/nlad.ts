/**
 * NLAD v1 writer: one JSON header line, then little-endian float32 values
 * (row-major), uint32 labels, optional uint32 predictions, optional JSON
 * doc-id line. Matches the consumer's byte-level reader exactly.
 */

export interface DumpPayload {
    layer: number;
    n: number;
    h: number;
    numClasses: number;
    values: Float32Array;          // length n*h, row-major
    labels: Uint32Array;           // length n
    predictions?: Uint32Array;     // length n
    docIds?: string[];
}

export function encodeNlad(dump: DumpPayload): Buffer {
    const { layer, n, h, numClasses, values, labels, predictions, docIds } = dump;
    if (values.length !== n * h) throw new Error("values length must be n*h");
    if (labels.length !== n) throw new Error("labels length must be n");
    if (predictions && predictions.length !== n) throw new Error("predictions length must be n");
    if (docIds && docIds.length !== n) throw new Error("doc_ids length must be n");

    const header = {
        magic: "NLAD",
        version: 1,
        layer,
        n,
        h,
        num_classes: numClasses,
        has_predictions: predictions !== undefined,
        has_doc_ids: docIds !== undefined,
    };
    const parts: Buffer[] = [Buffer.from(JSON.stringify(header) + "\n", "utf-8")];

    const valueBuf = Buffer.alloc(4 * values.length);
    for (let i = 0; i < values.length; i++) valueBuf.writeFloatLE(values[i], 4 * i);
    parts.push(valueBuf);

    const labelBuf = Buffer.alloc(4 * n);
    for (let i = 0; i < n; i++) labelBuf.writeUInt32LE(labels[i], 4 * i);
    parts.push(labelBuf);

    if (predictions) {
        const predBuf = Buffer.alloc(4 * n);
        for (let i = 0; i < n; i++) predBuf.writeUInt32LE(predictions[i], 4 * i);
        parts.push(predBuf);
    }
    if (docIds) {
        parts.push(Buffer.from(JSON.stringify(docIds) + "\n", "utf-8"));
    }
    return Buffer.concat(parts);
}
