#pragma once

#include "vqt/analysis.hpp"
#include "vqt/audio.hpp"
#include "vqt/cepstrum.hpp"
#include "vqt/dsm.hpp"
#include "vqt/dsp.hpp"
#include "vqt/eigen_basis.hpp"
#include "vqt/error.hpp"
#include "vqt/fft.hpp"
#include "vqt/framing.hpp"
#include "vqt/gci.hpp"
#include "vqt/glottal.hpp"
#include "vqt/harmonicity.hpp"
#include "vqt/lpc.hpp"
#include "vqt/metrics.hpp"
#include "vqt/pitch.hpp"
#include "vqt/preset_io.hpp"
#include "vqt/stats.hpp"
#include "vqt/tilt.hpp"
