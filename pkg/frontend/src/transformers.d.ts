// Optional peer dependency, loaded dynamically at runtime only when a
// non-hash model id is requested. Typed as any so builds work without it.
declare module '@xenova/transformers';
