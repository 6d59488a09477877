from cli.base import SolverCommand, add_instance_arguments, add_json_argument, instance_from
from solver.online import region_corners


class Command(SolverCommand):
    help = 'Corner points of the timely throughput region under coordinated online scheduling'

    def add_arguments(self, parser):
        add_instance_arguments(parser)
        add_json_argument(parser)

    def solve(self, **opts):
        corners = region_corners(instance_from(opts))
        self.emit(opts, corners, "\n".join(" ".join(f"{v:.12g}" for v in corner) for corner in corners))
