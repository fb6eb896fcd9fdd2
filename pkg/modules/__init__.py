"""
近端梯度族与投影算法的自收缩轨迹工具包

模块结构：
1. core - 点、轨迹与基础度量
2. oracles / sets - 凸函数预言机与闭凸集
3. algorithms - 迭代运行器
4. analysis - 自收缩判定与不等式审计
5. problem_config / trajectory_io / svg_plot / cli - 配置、读写与命令行
"""

__version__ = "1.0.0"
