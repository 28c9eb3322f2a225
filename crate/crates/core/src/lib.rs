pub mod contraction;
pub mod customization;
pub mod graph;
pub mod heap;
pub mod hierarchy;
pub mod index;
pub mod oracle;
pub mod query;
pub mod shortcuts;
pub mod ttf;

#[cfg(test)]
mod test_util;
