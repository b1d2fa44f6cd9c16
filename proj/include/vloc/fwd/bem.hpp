#pragma once

#include <Eigen/Dense>
#include <memory>

#include "vloc/mesh/barycentric.hpp"
#include "vloc/mesh/trimesh.hpp"

namespace vloc {

// One conductivity interface: a closed, outward-oriented surface with the
// conductivities on its two sides (S/m). The outermost compartment has
// sigma_outside = 0.
struct Compartment {
    TriMesh surface;
    double sigma_inside = 0.2;
    double sigma_outside = 0.0;
};

// Electrode potentials over time, 200 x T, mV at 1 kHz.
using BSPMatrix = Eigen::MatrixXf;

// Linear shape-function solid-angle integrals of one surface seen from y:
// w[j] += integral over the surface of psi_j dOmega, with
// dOmega = ((x-y) . n) / |x-y|^3 dS. Adaptive subdivision near y.
void accumulate_solid_angle_weights(const TriMesh& surf, const Vec3& y, double* w);

// Collocation BEM for nested compartments with an equivalent-double-layer
// source on the heart surface. Unknowns are the potentials at all interface
// nodes; the singular constant mode is removed by deflation (zero mean over
// the outermost surface's nodes).
class BemSolver {
  public:
    explicit BemSolver(std::vector<Compartment> compartments);

    int n_nodes() const { return n_nodes_; }
    int node_offset(int comp) const { return offsets_[static_cast<size_t>(comp)]; }
    const Compartment& compartment(int i) const { return comps_[static_cast<size_t>(i)]; }
    int n_compartments() const { return static_cast<int>(comps_.size()); }

    // Assembles the interface operator, applies the constant-mode deflation
    // and factorizes. Throws "bem-singular" if the deflated system fails.
    void factorize(int deflation_variant = 0);

    // phi at all interface nodes for a right-hand side sigma_s * phi_inf.
    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

    // rhs of a current dipole at pos with moment p (A*mm scale arbitrary).
    Eigen::VectorXd dipole_rhs(const Vec3& pos, const Vec3& moment) const;

    // rhs matrix of the heart-surface double layer: rhs = B * Vm, where Vm
    // holds per-node transmembrane voltages on heart_surface.
    Eigen::MatrixXd source_matrix(const TriMesh& heart_surface, double sigma_intra) const;

    // Transfer matrix electrodes x heart nodes: electrode potentials as
    // barycentric reads on the outermost surface. Uses the adjoint solve, so
    // it stays cheap for many heart nodes.
    Eigen::MatrixXd transfer(const std::vector<BaryPoint>& electrodes,
                             const Eigen::MatrixXd& B) const;

  private:
    std::vector<Compartment> comps_;
    std::vector<int> offsets_;
    int n_nodes_ = 0;
    Eigen::MatrixXd G_;
    std::shared_ptr<Eigen::PartialPivLU<Eigen::MatrixXd>> lu_, lu_t_;
};

// Source conductivities of the heart surface model.
struct SourceModel {
    TriMesh surface;
    double sigma_intra = 0.05;
    double sigma_extra = 0.15;
};

// Matrix product per time sample.
BSPMatrix forward_bsp(const Eigen::MatrixXf& A, const Eigen::MatrixXf& tmv);

}  // namespace vloc
