//! Short-term traffic speed forecasting on directed road networks.
//!
//! Speed series are split into frequency bands with a discrete wavelet
//! transform. The low band is forecast by a motif-based graph-convolutional
//! recurrent network and every high band by a per-segment ARMA model; the
//! band forecasts are summed per segment.

pub mod arma;
pub mod config;
pub mod data;
pub mod neural;
pub mod pipeline;
pub mod roadgraph;
pub mod wavelet;
