#pragma once

#include "densecap/partition.hpp"

namespace densecap {

/// Layer bookkeeping for a computational kernel on the interval
/// equipartition I_n, n = (L+2) d.
///
/// Part indices of I_n: layer l (l = 0..L) owns [l d, (l+1) d); the bias
/// layer owns [(L+1) d, (L+2) d). The input layer is grouped into d0 cells
/// of d/d0 consecutive parts, the output layer into dL cells of d/dL parts.
struct LayerStructure {
  int L = 2;
  int d0 = 1;
  int dL = 1;
  int d = 1;

  LayerStructure() = default;
  LayerStructure(int L, int d0, int dL, int d);

  int n() const { return (L + 2) * d; }
  /// lcm(d0, dL).
  int M() const;
  /// Index of the bias layer (L+1).
  int bias_layer() const { return L + 1; }

  int layer_begin(int layer) const { return layer * d; }
  int layer_end(int layer) const { return (layer + 1) * d; }
  /// Layer (0..L+1, bias = L+1) of part p of I_n.
  int layer_of(int part) const { return part / d; }
  int parts_per_input_cell() const { return d / d0; }
  int parts_per_output_cell() const { return d / dL; }
  /// Input cell of part p (p must lie in layer 0).
  int input_cell(int part) const { return part / parts_per_input_cell(); }
  /// Output cell of part p (p must lie in layer L).
  int output_cell(int part) const {
    return (part - layer_begin(L)) / parts_per_output_cell();
  }

  /// Layer partition U_{L+2} = {U^(0), ..., U^(L), U^(bias)}.
  Partition layer_partition() const;
  /// Coarse input partition: I_{(L+2) d0}; cell j is part j.
  Partition input_cells() const;
  /// Coarse output partition: I_{(L+2) dL}; cell i is part L dL + i.
  Partition output_cells() const;
  /// Layer-respecting partition: hidden layers and bias as whole parts,
  /// the input layer split into its d0 cells and the output layer into its
  /// dL cells. Part order follows position.
  Partition layer_respecting_partition() const;

  friend bool operator==(const LayerStructure&, const LayerStructure&) = default;
};

}  // namespace densecap
