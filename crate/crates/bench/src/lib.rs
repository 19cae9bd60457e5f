pub use pennies_core;
