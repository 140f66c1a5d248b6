// Umbrella header.
#pragma once

#include "qbdi/channel.hpp"
#include "qbdi/errors.hpp"
#include "qbdi/io.hpp"
#include "qbdi/midi.hpp"
#include "qbdi/model_io.hpp"
#include "qbdi/pianoroll.hpp"
#include "qbdi/pipeline.hpp"
#include "qbdi/synthetic.hpp"
#include "qbdi/vae.hpp"
#include "qbdi/vmo.hpp"
