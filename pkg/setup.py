from setuptools import find_packages, setup


if __name__ == '__main__':
    setup(
        name='basconv',
        version='0.1.0',
        description='basket-aware graph convolution for within-basket recommendation',
        license='MIT',
        packages=find_packages(
            exclude=[
                'tests',
                'data',
                'build',
                'ckpt',
                'docs',
                'lightning_logs',
                'outputs',
                'wandb',
                'tmp',
                '.vscode',
                '*.egg-info'
            ]
        ),
        install_requires=[
            'torch>=2.1',
            'pytorch-lightning>=2.1',
            'hydra-core>=1.3',
            'omegaconf>=2.3',
            'numpy',
            'scipy',
            'pandas',
            'pyarrow',
            'tqdm',
            'wandb',
        ],
        package_data={
            'basconv': ['configs/*.yaml', 'configs/method/*.yaml'],
        },
        entry_points={
            'console_scripts': [
                'basconv=basconv.cli:main',
            ],
        },
    )
