/** Wire types mirrored from the HTTP service. */
export {};
