#include <stdexcept>

#include "lwpt/kernel.hpp"

namespace lwpt {

namespace {

// Orthonormal scaling filters, minimum-phase, unit l2 norm. Values computed
// by spectral factorization at 80-digit precision and rounded to double, so
// the double-shift orthogonality residuals sit at machine epsilon rather
// than at the ~1e-12 accuracy of the commonly reprinted tables.
const std::vector<double> kHaar = {
    0.7071067811865476, 0.7071067811865476};

const std::vector<double> kDb4 = {
    0.23037781330889650,   0.71484657055291565,   0.63088076792985891,
    -0.027983769416859854, -0.18703481171909308,  0.030841381835560764,
    0.032883011666885200,  -0.010597401785069032};

const std::vector<double> kDb23 = {
    0.00027190419412828884, 0.0042027488931838335,  0.029310003657884115,
    0.12051553178397193,    0.31845081385286524,    0.54493114787352043,
    0.55101851724191939,    0.18139262536384001,    -0.26139214803064411,
    -0.27140209860784306,   0.092125407082418053,   0.22357365824204023,
    -0.033037447094289379,  -0.16401132153187593,   0.020283074575649300,
    0.11229704361810729,    -0.021126212356227241,  -0.070207391574901109,
    0.021765856834499976,   0.038495332522569199,   -0.018523513650156160,
    -0.017537101003035845,  0.012751943931528286,   0.0060318406500241628,
    -0.0070753192737061528, -0.0011348654733562517, 0.0031228764498181450,
    -0.00024650140051635120, -0.0010612312288866513, 0.00031942049270990115,
    0.00025676245200787372, -0.00015002185034903410, -3.3788948341209034e-05,
    4.4260712031092461e-05, -2.6352078892491862e-06, -8.3478755678546255e-06,
    2.3975695468402401e-06, 8.1475748347794478e-07,  -5.3390054052094212e-07,
    1.8530917856339650e-08, 5.4175491795392787e-08,  -1.3999354954379988e-08,
    -9.4728859018120505e-10, 1.0504464536965434e-09, -1.9324051113134175e-10,
    1.2502033023510409e-11};

}  // namespace

Kernel wavelet_constants(const std::string& name) {
  if (name == "haar") return Kernel(kHaar);
  if (name == "db4") return Kernel(kDb4);
  if (name == "db23") return Kernel(kDb23);
  throw std::invalid_argument("wavelet_constants: unknown wavelet '" + name +
                              "' (known: haar, db4, db23)");
}

}  // namespace lwpt
