#pragma once

#include "hodgefrob/amodel.hpp"
#include "hodgefrob/degeneration.hpp"
#include "hodgefrob/frobmod.hpp"
#include "hodgefrob/hodge.hpp"
#include "hodgefrob/io.hpp"
#include "hodgefrob/linfilt.hpp"
#include "hodgefrob/matrix.hpp"
#include "hodgefrob/qseries.hpp"
#include "hodgefrob/report.hpp"
#include "hodgefrob/scalar.hpp"
#include "hodgefrob/unfold.hpp"
#include "hodgefrob/vhs2frob.hpp"
