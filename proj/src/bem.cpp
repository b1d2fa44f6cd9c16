#include "vloc/fwd/bem.hpp"

#include <cmath>
#include <stdexcept>

namespace vloc {

namespace {

// Van Oosterom & Strackee signed solid angle of the triangle (r1,r2,r3)
// relative to the observation point at the origin. Positive when the
// outward-wound triangle faces away from the observer, so that a closed
// outward surface integrates to +4*pi from inside.
double signed_solid_angle(const Vec3& r1, const Vec3& r2, const Vec3& r3) {
    const double l1 = r1.norm(), l2 = r2.norm(), l3 = r3.norm();
    const double triple = r1.dot(r2.cross(r3));
    const double den = l1 * l2 * l3 + r1.dot(r2) * l3 + r2.dot(r3) * l1 + r3.dot(r1) * l2;
    return 2.0 * std::atan2(triple, den);
}

struct WeightSink {
    double* w;
    const std::array<int, 3>* tri;
};

// Recursive subdivision: leaf contributions use the exact sub-triangle solid
// angle weighted by the root triangle's linear shape functions at the
// sub-centroid. Row-sum exactness is preserved because the three shape
// weights sum to one at every leaf.
void integrate_recursive(const Vec3& y, const Vec3 p[3], const Vec3 bary[3], int depth,
                         const WeightSink& sink) {
    const double e0 = (p[1] - p[0]).norm(), e1 = (p[2] - p[1]).norm(), e2 = (p[0] - p[2]).norm();
    const double size = std::max({e0, e1, e2});
    const Vec3 centroid = (p[0] + p[1] + p[2]) / 3.0;
    if (depth > 0 && (centroid - y).norm() < 2.0 * size) {
        const Vec3 m01 = 0.5 * (p[0] + p[1]), m12 = 0.5 * (p[1] + p[2]), m20 = 0.5 * (p[2] + p[0]);
        const Vec3 b01 = 0.5 * (bary[0] + bary[1]), b12 = 0.5 * (bary[1] + bary[2]),
                   b20 = 0.5 * (bary[2] + bary[0]);
        {
            const Vec3 q[3] = {p[0], m01, m20}, b[3] = {bary[0], b01, b20};
            integrate_recursive(y, q, b, depth - 1, sink);
        }
        {
            const Vec3 q[3] = {p[1], m12, m01}, b[3] = {bary[1], b12, b01};
            integrate_recursive(y, q, b, depth - 1, sink);
        }
        {
            const Vec3 q[3] = {p[2], m20, m12}, b[3] = {bary[2], b20, b12};
            integrate_recursive(y, q, b, depth - 1, sink);
        }
        {
            const Vec3 q[3] = {m01, m12, m20}, b[3] = {b01, b12, b20};
            integrate_recursive(y, q, b, depth - 1, sink);
        }
        return;
    }
    const double omega = signed_solid_angle(p[0] - y, p[1] - y, p[2] - y);
    const Vec3 bc = (bary[0] + bary[1] + bary[2]) / 3.0;
    for (int k = 0; k < 3; ++k) sink.w[(*sink.tri)[k]] += omega * bc[k];
}

}  // namespace

void accumulate_solid_angle_weights(const TriMesh& surf, const Vec3& y, double* w) {
    static const Vec3 kRootBary[3] = {Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
    for (size_t t = 0; t < surf.tris.size(); ++t) {
        const auto& tr = surf.tris[t];
        const Vec3 p[3] = {surf.vertices[tr[0]], surf.vertices[tr[1]], surf.vertices[tr[2]]};
        WeightSink sink{w, &tr};
        integrate_recursive(y, p, kRootBary, 4, sink);
    }
}

BemSolver::BemSolver(std::vector<Compartment> compartments) : comps_(std::move(compartments)) {
    if (comps_.empty()) throw std::runtime_error("bem: no compartments");
    offsets_.resize(comps_.size() + 1, 0);
    for (size_t i = 0; i < comps_.size(); ++i) {
        comps_[i].surface.validate();
        if (!comps_[i].surface.is_watertight())
            throw std::runtime_error("bem: compartment surface not closed");
        offsets_[i + 1] = offsets_[i] + comps_[i].surface.n_vertices();
    }
    n_nodes_ = offsets_.back();
    if (comps_[0].sigma_outside != 0.0)
        throw std::runtime_error("bem: outermost compartment must have sigma_outside = 0");
}

void BemSolver::factorize(int deflation_variant) {
    G_ = Eigen::MatrixXd::Zero(n_nodes_, n_nodes_);

    // W blocks: w_{y,j} = linear solid-angle weights; G = C - (1/4pi) sum_k
    // dsigma_k W_k, with the self-surface diagonal corrected so constants are
    // exactly in the nullspace (auto solid angle).
    std::vector<double> row(static_cast<size_t>(n_nodes_));
    for (int lc = 0; lc < n_compartments(); ++lc) {
        const int l0 = offsets_[static_cast<size_t>(lc)];
        const auto& lsurf = comps_[static_cast<size_t>(lc)].surface;
        const double sigma_mean =
            0.5 * (comps_[static_cast<size_t>(lc)].sigma_inside + comps_[static_cast<size_t>(lc)].sigma_outside);
        for (int yi = 0; yi < lsurf.n_vertices(); ++yi) {
            const Vec3 y = lsurf.vertices[static_cast<size_t>(yi)];
            std::fill(row.begin(), row.end(), 0.0);
            for (int kc = 0; kc < n_compartments(); ++kc) {
                accumulate_solid_angle_weights(comps_[static_cast<size_t>(kc)].surface, y,
                                               row.data() + offsets_[static_cast<size_t>(kc)]);
            }
            // Row sums per surface; fix the self-surface diagonal so that
            // sum_k dsigma_k Omega_k(y) = 4 pi sigma_mean holds exactly.
            double cross = 0.0, self_sum = 0.0;
            for (int kc = 0; kc < n_compartments(); ++kc) {
                const double ds = comps_[static_cast<size_t>(kc)].sigma_inside -
                                  comps_[static_cast<size_t>(kc)].sigma_outside;
                double s = 0.0;
                for (int j = 0; j < comps_[static_cast<size_t>(kc)].surface.n_vertices(); ++j)
                    s += row[static_cast<size_t>(offsets_[static_cast<size_t>(kc)] + j)];
                if (kc == lc)
                    self_sum = s;
                else
                    cross += ds * s;
            }
            const double ds_l = comps_[static_cast<size_t>(lc)].sigma_inside -
                                comps_[static_cast<size_t>(lc)].sigma_outside;
            const double target_self = (4.0 * M_PI * sigma_mean - cross) / ds_l;
            row[static_cast<size_t>(l0 + yi)] += target_self - self_sum;

            const int gr = l0 + yi;
            for (int kc = 0; kc < n_compartments(); ++kc) {
                const double ds = comps_[static_cast<size_t>(kc)].sigma_inside -
                                  comps_[static_cast<size_t>(kc)].sigma_outside;
                const double scale = -ds / (4.0 * M_PI);
                for (int j = 0; j < comps_[static_cast<size_t>(kc)].surface.n_vertices(); ++j)
                    G_(gr, offsets_[static_cast<size_t>(kc)] + j) =
                        scale * row[static_cast<size_t>(offsets_[static_cast<size_t>(kc)] + j)];
            }
            G_(gr, gr) += sigma_mean;
        }
    }

    // Deflation: G + e w^T pins the weighted mean of phi over the outermost
    // surface's nodes to zero. Variant 1 uses area weights (for the
    // deflation-independence property check).
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n_nodes_);
    const auto& outer = comps_[0].surface;
    if (deflation_variant == 0) {
        for (int j = 0; j < outer.n_vertices(); ++j) w[j] = 1.0 / outer.n_vertices();
    } else {
        std::vector<double> va(static_cast<size_t>(outer.n_vertices()), 0.0);
        for (size_t t = 0; t < outer.tris.size(); ++t)
            for (int k = 0; k < 3; ++k) va[static_cast<size_t>(outer.tris[t][k])] += outer.areas[t] / 3.0;
        double total = 0.0;
        for (double a : va) total += a;
        for (int j = 0; j < outer.n_vertices(); ++j) w[j] = va[static_cast<size_t>(j)] / total;
    }
    G_ += Eigen::VectorXd::Ones(n_nodes_) * w.transpose();

    lu_ = std::make_shared<Eigen::PartialPivLU<Eigen::MatrixXd>>(G_);
    lu_t_ = std::make_shared<Eigen::PartialPivLU<Eigen::MatrixXd>>(G_.transpose());
    // Cheap singularity probe: the deflated operator must reproduce a
    // constant right-hand side consistently.
    const Eigen::VectorXd probe = lu_->solve(Eigen::VectorXd::Ones(n_nodes_));
    if (!probe.allFinite()) throw std::runtime_error("bem-singular");
}

Eigen::VectorXd BemSolver::solve(const Eigen::VectorXd& rhs) const {
    if (!lu_) throw std::runtime_error("bem: factorize() first");
    return lu_->solve(rhs);
}

Eigen::VectorXd BemSolver::dipole_rhs(const Vec3& pos, const Vec3& moment) const {
    Eigen::VectorXd rhs(n_nodes_);
    int idx = 0;
    for (const auto& comp : comps_) {
        for (const auto& v : comp.surface.vertices) {
            const Vec3 d = v - pos;
            const double r = d.norm();
            rhs[idx++] = moment.dot(d) / (4.0 * M_PI * r * r * r);
        }
    }
    return rhs;
}

Eigen::MatrixXd BemSolver::source_matrix(const TriMesh& heart_surface, double sigma_intra) const {
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n_nodes_, heart_surface.n_vertices());
    std::vector<double> row(static_cast<size_t>(heart_surface.n_vertices()));
    const double scale = -sigma_intra / (4.0 * M_PI);
    int idx = 0;
    for (const auto& comp : comps_) {
        for (const auto& v : comp.surface.vertices) {
            std::fill(row.begin(), row.end(), 0.0);
            accumulate_solid_angle_weights(heart_surface, v, row.data());
            for (int j = 0; j < heart_surface.n_vertices(); ++j)
                B(idx, j) = scale * row[static_cast<size_t>(j)];
            ++idx;
        }
    }
    return B;
}

Eigen::MatrixXd BemSolver::transfer(const std::vector<BaryPoint>& electrodes,
                                    const Eigen::MatrixXd& B) const {
    if (!lu_t_) throw std::runtime_error("bem: factorize() first");
    const int ne = static_cast<int>(electrodes.size());
    Eigen::MatrixXd Et = Eigen::MatrixXd::Zero(n_nodes_, ne);
    const auto& outer = comps_[0].surface;
    for (int e = 0; e < ne; ++e) {
        const auto& bp = electrodes[static_cast<size_t>(e)];
        for (int k = 0; k < 3; ++k)
            Et(outer.tris[static_cast<size_t>(bp.tri)][k], e) += bp.w[static_cast<size_t>(k)];
    }
    const Eigen::MatrixXd Y = lu_t_->solve(Et);  // G^T Y = E^T
    return Y.transpose() * B;
}

BSPMatrix forward_bsp(const Eigen::MatrixXf& A, const Eigen::MatrixXf& tmv) {
    if (A.cols() != tmv.rows()) throw std::runtime_error("forward_bsp: shape mismatch");
    return A * tmv;
}

}  // namespace vloc
