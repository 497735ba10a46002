pub mod eval;
pub mod evolve;
pub mod gen_env;
pub mod replay;
