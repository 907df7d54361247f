//! Core of the SG-ML processor: IEC 61850 SCL handling, proprietary file
//! validation, and the compilers that turn substation models into cyber
//! range configuration artifacts.

pub mod ied;
pub mod multisub;
pub mod plcopen;
pub mod power;
pub mod scada;
pub mod scl;
pub mod validate;
pub mod xml;
