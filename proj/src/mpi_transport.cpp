#include "kinflow/exchange.hpp"

#include <mpi.h>

namespace kinflow {

namespace {

class MpiTransport final : public Transport {
 public:
  MpiTransport() {
    MPI_Comm_rank(MPI_COMM_WORLD, &rank_);
    MPI_Comm_size(MPI_COMM_WORLD, &size_);
  }

  int rank() const override { return rank_; }
  int size() const override { return size_; }

  void initiate_send(int peer, std::span<const std::byte> data) override {
    MPI_Request request;
    check(MPI_Isend(data.data(), static_cast<int>(data.size()), MPI_BYTE, peer, kTag, MPI_COMM_WORLD, &request),
          "MPI_Isend");
    requests_.push_back(request);
    receiveSizes_.push_back(-1);
  }

  void initiate_receive(int peer, std::span<std::byte> buffer) override {
    MPI_Request request;
    check(MPI_Irecv(buffer.data(), static_cast<int>(buffer.size()), MPI_BYTE, peer, kTag, MPI_COMM_WORLD, &request),
          "MPI_Irecv");
    requests_.push_back(request);
    receiveSizes_.push_back(static_cast<int>(buffer.size()));
  }

  void wait_all() override {
    std::vector<MPI_Status> status(requests_.size());
    const int rc = MPI_Waitall(static_cast<int>(requests_.size()), requests_.data(), status.data());
    const auto sizes = std::move(receiveSizes_);
    requests_.clear();
    receiveSizes_.clear();
    check(rc, "MPI_Waitall");
    for (std::size_t k = 0; k < sizes.size(); ++k) {
      if (sizes[k] < 0) continue;
      int count = 0;
      MPI_Get_count(&status[k], MPI_BYTE, &count);
      if (count != sizes[k])
        throw ScheduleError("expected " + std::to_string(sizes[k]) + " bytes, received " + std::to_string(count));
    }
  }

  double reduce_min(double value) override {
    double out = 0.0;
    check(MPI_Allreduce(&value, &out, 1, MPI_DOUBLE, MPI_MIN, MPI_COMM_WORLD), "MPI_Allreduce");
    return out;
  }

  void barrier() override { check(MPI_Barrier(MPI_COMM_WORLD), "MPI_Barrier"); }

 private:
  static constexpr int kTag = 7;

  static void check(int rc, const char* what) {
    if (rc != MPI_SUCCESS) throw TransportError(std::string(what) + " failed with code " + std::to_string(rc));
  }

  int rank_ = 0;
  int size_ = 1;
  std::vector<MPI_Request> requests_;
  std::vector<int> receiveSizes_;
};

}  // namespace

std::unique_ptr<Transport> make_mpi_transport() { return std::make_unique<MpiTransport>(); }

}  // namespace kinflow
