#pragma once

#include "gecmetric/analysis.hpp"
#include "gecmetric/checker.hpp"
#include "gecmetric/corpus.hpp"
#include "gecmetric/detectors.hpp"
#include "gecmetric/error.hpp"
#include "gecmetric/gleu.hpp"
#include "gecmetric/imeasure.hpp"
#include "gecmetric/lfm.hpp"
#include "gecmetric/m2_format.hpp"
#include "gecmetric/maxmatch.hpp"
#include "gecmetric/ngram_lm.hpp"
#include "gecmetric/parallel.hpp"
#include "gecmetric/random.hpp"
#include "gecmetric/report.hpp"
#include "gecmetric/ridge.hpp"
#include "gecmetric/scoring.hpp"
#include "gecmetric/stats.hpp"
#include "gecmetric/text_io.hpp"
