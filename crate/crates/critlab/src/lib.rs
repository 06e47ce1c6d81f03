pub use critlab_core as core;
