//! Runs the code listings of the guide in `book/` as doc-tests.

#[doc = include_str!("../../../book/src/introduction.md")]
mod introduction {}

#[doc = include_str!("../../../book/src/levels.md")]
mod levels {}

#[doc = include_str!("../../../book/src/transitions.md")]
mod transitions {}

#[doc = include_str!("../../../book/src/magic-fields.md")]
mod magic_fields {}

#[doc = include_str!("../../../book/src/echo.md")]
mod echo {}

#[doc = include_str!("../../../book/src/decoherence.md")]
mod decoherence {}

#[doc = include_str!("../../../book/src/cli.md")]
mod cli {}
