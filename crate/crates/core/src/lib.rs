pub mod hdl;
pub mod symlogic;
pub mod embeddings;
pub mod providers;
pub mod knowledge_base;
pub mod metrics;
pub mod forge;
pub mod pipeline;
