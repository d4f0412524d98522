#pragma once

#include "sombra/bench.hpp"
#include "sombra/bmu.hpp"
#include "sombra/codebook.hpp"
#include "sombra/config.hpp"
#include "sombra/distance.hpp"
#include "sombra/error.hpp"
#include "sombra/ingest.hpp"
#include "sombra/io.hpp"
#include "sombra/matrix.hpp"
#include "sombra/memmodel.hpp"
#include "sombra/neighborhood.hpp"
#include "sombra/parallel.hpp"
#include "sombra/quality.hpp"
#include "sombra/trainer.hpp"
#include "sombra/update.hpp"
#include "sombra/vocabulary.hpp"
#include "sombra/xml_scanner.hpp"
