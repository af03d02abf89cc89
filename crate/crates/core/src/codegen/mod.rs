//! Lowering of normal-form trees to straight-line code.

mod program;
mod stage;

pub use program::{emit_body, emit_source, Instr, Operand, Program};
pub use stage::{
    bitwise_agrees, stage_compile, stage_compile_many, stage_or_interpret,
    stage_or_interpret_many, GeneratedFn, StagedEntry,
};
