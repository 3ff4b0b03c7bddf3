#ifndef CADRE_CADRE_HPP
#define CADRE_CADRE_HPP

#include "cadre/bif.hpp"
#include "cadre/campaign.hpp"
#include "cadre/cpdag.hpp"
#include "cadre/dataset.hpp"
#include "cadre/ensemble.hpp"
#include "cadre/error.hpp"
#include "cadre/evaluation.hpp"
#include "cadre/ges.hpp"
#include "cadre/graph.hpp"
#include "cadre/metrics.hpp"
#include "cadre/parallel.hpp"
#include "cadre/pipeline.hpp"
#include "cadre/resample.hpp"
#include "cadre/rng.hpp"
#include "cadre/score.hpp"
#include "cadre/sem.hpp"

#endif // CADRE_CADRE_HPP
