pub mod bounds;
pub mod compose;
pub mod curves;
pub mod simulate;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Clean,
    /// A simulated run broke a couple or a delay bound.
    Violations,
}
