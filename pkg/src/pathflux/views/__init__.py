from .report_views import envelope, estimation_table, experiment_table, oracle_table, render

__all__ = ["envelope", "estimation_table", "experiment_table", "oracle_table", "render"]
