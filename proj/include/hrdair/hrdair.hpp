#pragma once

#include "hrdair/core.hpp"
#include "hrdair/rng.hpp"

#include "hrdair/model/channel.hpp"
#include "hrdair/model/config.hpp"
#include "hrdair/model/ris.hpp"
#include "hrdair/model/uplink.hpp"

#include "hrdair/codec/aggregate.hpp"
#include "hrdair/codec/blocks.hpp"
#include "hrdair/codec/codebook.hpp"
#include "hrdair/codec/detection.hpp"

#include "hrdair/theory/bounds.hpp"
#include "hrdair/theory/classifier.hpp"
#include "hrdair/theory/entropy.hpp"
#include "hrdair/theory/gmm.hpp"
#include "hrdair/theory/theorem1.hpp"

#include "hrdair/opt/beamforming.hpp"
#include "hrdair/opt/bit_allocation.hpp"
#include "hrdair/opt/jqapb.hpp"
#include "hrdair/opt/ris_update.hpp"
#include "hrdair/opt/state.hpp"
#include "hrdair/opt/transmission.hpp"

#include "hrdair/harness/baselines.hpp"
#include "hrdair/harness/correlation.hpp"
#include "hrdair/harness/features.hpp"
#include "hrdair/harness/metrics.hpp"
#include "hrdair/harness/schemes.hpp"
#include "hrdair/harness/trial.hpp"
#include "hrdair/harness/csv.hpp"
#include "hrdair/harness/sweep.hpp"
