//! Reference models of HERA and Rubato keystream generation.

mod encoding;
mod keystream;
mod layers;
mod mixing;
mod paramfile;
mod params;
mod state;

pub use encoding::{decrypt, decrypt_with_keystream, encrypt, encrypt_with_keystream};
pub use keystream::{
    hera_keystream, parse_hex, program, rubato_keystream, stream_material, Cipher, ConstantSource,
    FixedConstants, GaussianNoise, Key, Keystream, Layer, LayerState, ListConstants, NoiseSource,
    ZeroNoise, MAX_NONCE_BYTES,
};
pub use layers::{agn, ark, ark_prefix, cube, feistel, feistel_inverse, truncate};
pub use mixing::{mix_columns, mix_rows, mrmc, MixingMatrix, MAX_ENTRY};
pub use paramfile::{format_params, load_params, parse_params};
pub use params::{
    default_ic, CipherParams, Scheme, DEFAULT_SIGMA, DEFAULT_TAIL_CUT, HERA_DEFAULT_Q,
    RUBATO_DEFAULT_Q,
};
pub use state::{Order, StateMatrix};
