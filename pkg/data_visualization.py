import os

import pandas as pd
import plotly.express as px

from evaluation import ERROR_COLUMNS


def errors_figure(table):
    """Grouped bars of the motion errors of every slave"""
    df = table.melt(id_vars=["path"], value_vars=ERROR_COLUMNS, var_name="Parameter", value_name="Error")
    df["Parameter"] = df["Parameter"].map({"d_theta": "Δθ (deg)", "d_ty": "Δt_y (px)", "d_tx": "Δt_x (px)"})
    return px.bar(
        df,
        x="path",
        y="Error",
        color="Parameter",
        barmode="group",
        title="Motion Errors by Slave",
        color_discrete_sequence=px.colors.qualitative.Pastel,
    )


def mi_figure(table):
    """Mutual information with the reference before and after alignment"""
    df = table[["path", "mi_before", "mi_after"]].rename(columns={"mi_before": "Before", "mi_after": "After"})
    df = df.melt(id_vars=["path"], var_name="Stage", value_name="MI (bits)")
    return px.bar(
        df,
        x="path",
        y="MI (bits)",
        color="Stage",
        barmode="group",
        title="Mutual Information with the Reference",
        color_discrete_sequence=px.colors.qualitative.Bold,
    )


def error_by_exposure_figure(table):
    """Mean error per exposure shift, one line per parameter"""
    df = table.groupby("ev")[ERROR_COLUMNS].mean().reset_index()
    df = df.melt(id_vars=["ev"], var_name="Parameter", value_name="Mean Error")
    return px.line(df, x="ev", y="Mean Error", color="Parameter", markers=True, title="Mean Error by Exposure Shift")


def write_dashboard(table, path):
    """
    Write the evaluation charts into one standalone HTML file

    Parameters:
    - table: DataFrame from evaluation.errors_table
    - path: destination .html file

    Returns:
    - the path written
    """
    if not isinstance(table, pd.DataFrame) or table.empty:
        raise ValueError("No evaluated slaves to plot")

    directory = os.path.dirname(path)
    if directory and not os.path.exists(directory):
        os.makedirs(directory)

    figures = [errors_figure(table), mi_figure(table)]
    if table["ev"].nunique() > 1:
        figures.append(error_by_exposure_figure(table))

    parts = [
        fig.to_html(full_html=False, include_plotlyjs="cdn" if i == 0 else False)
        for i, fig in enumerate(figures)
    ]
    with open(path, "w", encoding="utf-8") as f:
        f.write("<html><head><meta charset='utf-8'><title>Alignment Evaluation</title></head><body>\n")
        f.write("\n".join(parts))
        f.write("\n</body></html>\n")
    return path
