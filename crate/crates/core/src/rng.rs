//! Named random substreams.
//!
//! Every trajectory derives one ChaCha8 stream per simulation phase from its
//! master seed. Phases never share a stream, so turning the recommender on
//! leaves the arrival and meeting-strangers draws of a run untouched.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Init,
    Arrival,
    Strangers,
    Friends,
    Recommender,
    Behavior,
    Attrition,
    Assignment,
    Calibration,
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::Init => 1,
            Stream::Arrival => 2,
            Stream::Strangers => 3,
            Stream::Friends => 4,
            Stream::Recommender => 5,
            Stream::Behavior => 6,
            Stream::Attrition => 7,
            Stream::Assignment => 8,
            Stream::Calibration => 9,
        }
    }
}

/// Independent generator for `(seed, stream)`.
pub fn substream(seed: u64, stream: Stream) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream.id());
    rng
}

/// One generator per phase, all derived from a single master seed.
#[derive(Debug, Clone)]
pub struct Streams {
    pub init: SimRng,
    pub arrival: SimRng,
    pub strangers: SimRng,
    pub friends: SimRng,
    pub recommender: SimRng,
    pub behavior: SimRng,
    pub attrition: SimRng,
    pub assignment: SimRng,
}

impl Streams {
    pub fn new(seed: u64) -> Self {
        Streams {
            init: substream(seed, Stream::Init),
            arrival: substream(seed, Stream::Arrival),
            strangers: substream(seed, Stream::Strangers),
            friends: substream(seed, Stream::Friends),
            recommender: substream(seed, Stream::Recommender),
            behavior: substream(seed, Stream::Behavior),
            attrition: substream(seed, Stream::Attrition),
            assignment: substream(seed, Stream::Assignment),
        }
    }
}
