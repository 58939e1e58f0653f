/**
 * Association draft: the client-side state machine for pairing content
 * palette swatches with style palette swatches.
 *
 * Every swatch is in exactly one state: free, paired, or discarded. Pairing
 * replaces any existing pair touching either endpoint; discarding drops pairs
 * touching the swatch. Export produces the exact JSON the CLI accepts for
 * --assoc, byte for byte.
 */
export class AssociationDraft {
    constructor(contentCount, styleCount) {
        this._pairs = [];
        this._discardContent = new Set();
        this._discardStyle = new Set();
        if (contentCount < 0 || styleCount < 0) {
            throw new Error("swatch counts must be non-negative");
        }
        this.contentCount = contentCount;
        this.styleCount = styleCount;
    }
    get pairs() {
        return this._pairs;
    }
    checkIndex(side, index) {
        const count = side === "content" ? this.contentCount : this.styleCount;
        if (!Number.isInteger(index) || index < 0 || index >= count) {
            throw new Error(`${side} swatch ${index} out of range (0..${count - 1})`);
        }
    }
    stateOf(side, index) {
        this.checkIndex(side, index);
        const discards = side === "content" ? this._discardContent : this._discardStyle;
        if (discards.has(index))
            return "discarded";
        const pos = side === "content" ? 0 : 1;
        return this._pairs.some((p) => p[pos] === index) ? "paired" : "free";
    }
    /** Why a pair cannot be formed right now, or null if it can. */
    pairBlocked(contentIndex, styleIndex) {
        this.checkIndex("content", contentIndex);
        this.checkIndex("style", styleIndex);
        if (this._discardContent.has(contentIndex)) {
            return `content swatch ${contentIndex} is discarded`;
        }
        if (this._discardStyle.has(styleIndex)) {
            return `style swatch ${styleIndex} is discarded`;
        }
        return null;
    }
    /** Pair two swatches, replacing any existing pair touching either one. */
    pair(contentIndex, styleIndex) {
        const blocked = this.pairBlocked(contentIndex, styleIndex);
        if (blocked)
            throw new Error(blocked);
        this._pairs = this._pairs.filter((p) => p[0] !== contentIndex && p[1] !== styleIndex);
        this._pairs.push([contentIndex, styleIndex]);
    }
    unpair(contentIndex, styleIndex) {
        this._pairs = this._pairs.filter((p) => !(p[0] === contentIndex && p[1] === styleIndex));
    }
    /** Toggle a swatch's discarded state; discarding removes its pairs. */
    toggleDiscard(side, index) {
        this.checkIndex(side, index);
        const discards = side === "content" ? this._discardContent : this._discardStyle;
        if (discards.has(index)) {
            discards.delete(index);
            return "free";
        }
        discards.add(index);
        const pos = side === "content" ? 0 : 1;
        this._pairs = this._pairs.filter((p) => p[pos] !== index);
        return "discarded";
    }
    toJson() {
        return {
            pairs: this._pairs.map((p) => [p[0], p[1]]),
            discard_content: [...this._discardContent].sort((a, b) => a - b),
            discard_style: [...this._discardStyle].sort((a, b) => a - b),
        };
    }
    /** The exact bytes the CLI accepts for --assoc. */
    export() {
        return JSON.stringify(this.toJson());
    }
    static import(text, contentCount, styleCount) {
        const data = JSON.parse(text);
        const draft = new AssociationDraft(contentCount, styleCount);
        for (const index of data.discard_content ?? []) {
            draft.toggleDiscard("content", index);
        }
        for (const index of data.discard_style ?? []) {
            draft.toggleDiscard("style", index);
        }
        for (const pair of data.pairs ?? []) {
            if (!Array.isArray(pair) || pair.length !== 2) {
                throw new Error(`malformed pair: ${JSON.stringify(pair)}`);
            }
            draft.pair(pair[0], pair[1]);
        }
        return draft;
    }
}
